#pragma once
// Weights with logarithmic poles on small polydiscs.  A ModelWeight is a
// finite sum
//     Σ c·log|p(z)|  +  Σ c·log(|p1|^b1 + |p2|^b2)  +  smooth terms,
// with nonnegative rational coefficients on the logarithmic parts, so every
// instance is plurisubharmonic up to the explicit smooth remainder.  The
// module computes Lelong numbers in closed form (exact rationals), certifies
// the gradient mass  ∫ e^φ |∂φ|²  by singularity-adapted quadrature, and
// pairs ∂φ∧(·) against compactly supported bump test forms — the desk-scale
// stand-in for current-level identities.

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lefschetz/combinatorics.hpp"
#include "lefschetz/rational.hpp"

namespace lefschetz::weights {

using Cplx = std::complex<double>;
using alg::Mask;
using Point = std::vector<Cplx>;

// ---------------------------------------------------------------------------
// Mixed polynomials  Σ a_{αβ} z^α z̄^β  with complex coefficients.  Exponent
// keys are (α, β); arithmetic is exact on the exponent structure and floating
// on coefficients.  Holomorphic instances (β = 0) support vanishing orders.

struct Poly {
  int n = 1;
  std::map<std::pair<std::vector<int>, std::vector<int>>, Cplx> terms;

  Poly() = default;
  explicit Poly(int vars) : n(vars) {}

  static Poly constant(int n, Cplx a) {
    Poly p(n);
    if (a != Cplx{}) p.terms[{std::vector<int>(n, 0), std::vector<int>(n, 0)}] = a;
    return p;
  }
  // z_j (1-based)
  static Poly variable(int n, int j) {
    Poly p(n);
    std::vector<int> e(n, 0);
    e[j - 1] = 1;
    p.terms[{e, std::vector<int>(n, 0)}] = 1.0;
    return p;
  }

  bool is_zero(double tol = 0.0) const {
    for (const auto& [k, a] : terms)
      if (std::abs(a) > tol) return false;
    return true;
  }
  bool is_holomorphic() const {
    for (const auto& [k, a] : terms)
      for (int b : k.second)
        if (b != 0) return false;
    return true;
  }
  bool is_constant() const {
    for (const auto& [k, a] : terms)
      for (int j = 0; j < n; ++j)
        if (k.first[j] != 0 || k.second[j] != 0) return false;
    return true;
  }
  bool is_single_term() const { return terms.size() == 1; }

  int total_degree() const {
    int d = 0;
    for (const auto& [k, a] : terms) {
      int t = 0;
      for (int j = 0; j < n; ++j) t += k.first[j] + k.second[j];
      d = std::max(d, t);
    }
    return d;
  }

  // The unique 1-based variable this polynomial depends on, 0 if constant,
  // -1 if it genuinely mixes several variables.
  int only_variable() const {
    int var = 0;
    for (const auto& [k, a] : terms)
      for (int j = 0; j < n; ++j)
        if (k.first[j] != 0 || k.second[j] != 0) {
          if (var == 0)
            var = j + 1;
          else if (var != j + 1)
            return -1;
        }
    return var;
  }

  void add_term(std::vector<int> ez, std::vector<int> ezb, Cplx a) {
    auto key = std::make_pair(std::move(ez), std::move(ezb));
    Cplx& slot = terms[key];
    slot += a;
    if (slot == Cplx{}) terms.erase(key);
  }

  friend Poly operator+(const Poly& x, const Poly& y) {
    Poly out = x;
    for (const auto& [k, a] : y.terms) out.add_term(k.first, k.second, a);
    return out;
  }
  friend Poly operator-(const Poly& x, const Poly& y) { return x + y.scaled(-1.0); }
  friend Poly operator*(const Poly& x, const Poly& y) {
    Poly out(x.n);
    for (const auto& [kx, ax] : x.terms)
      for (const auto& [ky, ay] : y.terms) {
        std::vector<int> ez(x.n), ezb(x.n);
        for (int j = 0; j < x.n; ++j) {
          ez[j] = kx.first[j] + ky.first[j];
          ezb[j] = kx.second[j] + ky.second[j];
        }
        out.add_term(std::move(ez), std::move(ezb), ax * ay);
      }
    return out;
  }
  Poly scaled(Cplx a) const {
    Poly out(n);
    if (a == Cplx{}) return out;
    for (const auto& [k, c] : terms) out.terms[k] = c * a;
    return out;
  }
  Poly pow_int(int k) const {
    Poly out = constant(n, 1.0);
    for (int i = 0; i < k; ++i) out = out * (*this);
    return out;
  }

  Poly deriv_z(int j) const {  // 1-based
    Poly out(n);
    for (const auto& [k, a] : terms) {
      int e = k.first[j - 1];
      if (e == 0) continue;
      auto ez = k.first;
      ez[j - 1] -= 1;
      out.add_term(std::move(ez), k.second, a * static_cast<double>(e));
    }
    return out;
  }
  Poly deriv_zbar(int j) const {
    Poly out(n);
    for (const auto& [k, a] : terms) {
      int e = k.second[j - 1];
      if (e == 0) continue;
      auto eb = k.second;
      eb[j - 1] -= 1;
      out.add_term(k.first, std::move(eb), a * static_cast<double>(e));
    }
    return out;
  }

  Poly conjugated() const {  // complex conjugate of the function
    Poly out(n);
    for (const auto& [k, a] : terms) out.terms[{k.second, k.first}] = std::conj(a);
    return out;
  }

  Cplx eval(const Point& z) const {
    Cplx acc = 0.0;
    for (const auto& [k, a] : terms) {
      Cplx t = a;
      for (int j = 0; j < n; ++j) {
        for (int e = 0; e < k.first[j]; ++e) t *= z[j];
        for (int e = 0; e < k.second[j]; ++e) t *= std::conj(z[j]);
      }
      acc += t;
    }
    return acc;
  }

  // Recentred copy: returns q with q(w) = p(a + w), exact binomial expansion.
  Poly shifted(const Point& a) const;

  // Vanishing order at a point (holomorphic polynomials only): the least
  // total degree carrying a non-negligible recentred coefficient.
  int vanishing_order(const Point& a) const;

  // Upper bound for sup |p| on the closed polydisc {|z_j - c_j| <= r_j}.
  double sup_bound(const Point& center, const std::vector<double>& radii) const;

  // Coefficient list c_0..c_d in the single variable the polynomial uses
  // (must be univariate holomorphic); used for root extraction.
  std::vector<Cplx> univariate_coefficients(int* var_out) const;
};

// Roots of a univariate holomorphic polynomial (companion-matrix eigenvalues).
std::vector<Cplx> polynomial_roots(const Poly& p);

// ---------------------------------------------------------------------------
// Weight expression tree.

struct LogTerm {  // c·log|p|
  Rational c;
  Poly p;
  std::vector<Poly> dp;  // ∂p/∂z_j, precomputed
};
struct LogPairTerm {  // c·log(|p1|^b1 + |p2|^b2)
  Rational c, b1, b2;
  Poly p1, p2;
  std::vector<Poly> dp1, dp2;
};
struct SmoothTerm {  // c·Re p  (pluriharmonic) or c·cos/sin(Re p or Im p)
  enum Kind { kRealPart, kCos, kSin };
  Rational c;
  Kind kind = kRealPart;
  bool imag_argument = false;  // trig terms: argument Im p instead of Re p
  Poly p;
  std::vector<Poly> dp;
};

struct PolydiscDomain {
  Point center;
  std::vector<double> radii;

  PolydiscDomain(Point c, std::vector<double> r);
  int dim() const { return static_cast<int>(center.size()); }
  bool contains(const Point& z) const;
};

class ModelWeight {
 public:
  explicit ModelWeight(int vars) : n_(vars) {
    if (vars < 1) throw std::invalid_argument("ModelWeight: dimension must be positive");
  }

  // Grammar:  weight := term ('+' term)*,
  //           term   := [coef '*'] ( 'log|' poly '|'
  //                                | 'log(' '|'poly'|'['^'rat] '+' '|'poly'|'['^'rat] ')'
  //                                | 're(' poly ')'
  //                                | ('cos'|'sin') '(' ('re'|'im') '(' poly ')' ')' ),
  // with rational literals (3, -7/4, 0.9) and polynomial atoms z1..zn, i.
  static ModelWeight parse(const std::string& text, int vars);

  int dim() const { return n_; }

  void add_log(const Rational& c, Poly p);
  void add_log_pair(const Rational& c, const Rational& b1, Poly p1, const Rational& b2, Poly p2);
  void add_real_part(const Rational& c, Poly p);
  void add_trig(const Rational& c, bool sine, bool imag_argument, Poly p);

  const std::vector<LogTerm>& log_terms() const { return logs_; }
  const std::vector<LogPairTerm>& log_pair_terms() const { return log_pairs_; }
  const std::vector<SmoothTerm>& smooth_terms() const { return smooth_; }

  bool has_poles() const { return !logs_.empty() || !log_pairs_.empty(); }
  // True when i∂∂̄φ vanishes identically (only pluriharmonic smooth terms).
  bool is_pluriharmonic() const;

  double eval(const Point& z) const;  // may be -infinity
  // Value of the non-pluriharmonic part only (same i∂∂̄ as the full weight).
  double eval_curved(const Point& z) const;
  // Coefficients of ∂φ = Σ_j (∂φ/∂z_j) dz_j; finite away from the poles.
  std::vector<Cplx> del(const Point& z) const;

  Rational lelong(const Point& x) const;

  // Pole locations per coordinate: values a with some logarithmic argument
  // vanishing on {z_j = a}.  Throws when a pole polynomial is genuinely
  // multivariate (the model grammar keeps poles on coordinate lines).
  std::vector<std::vector<Cplx>> coordinate_singular_values() const;

  // Finite candidate set where the Lelong number can be positive, clipped to
  // the domain (products of per-coordinate pole values, padded by the center).
  std::vector<Point> singular_candidates(const PolydiscDomain& dom) const;

 private:
  int n_;
  std::vector<LogTerm> logs_;
  std::vector<LogPairTerm> log_pairs_;
  std::vector<SmoothTerm> smooth_;
};

Rational lelong_number(const ModelWeight& w, const Point& x, const PolydiscDomain& dom);

// ε · sup(Lelong numbers over the pole set inside dom) < 1, decided in exact
// rational arithmetic.
bool skoda_threshold_check(const ModelWeight& w, const PolydiscDomain& dom,
                           const Rational& epsilon);

// ∫_K e^φ |∂φ|² dV over the polydisc K (dV = 2^n·Lebesgue, unit coframe).
// Throws std::runtime_error("mass bound not certified...") when the
// singularity-adapted refinement fails to stabilise.
double mass_bound(const ModelWeight& w, const PolydiscDomain& K);

// ---------------------------------------------------------------------------
// Test forms: a single monomial direction dz_I∧dz̄_J carrying a polynomial
// times a polydisc plateau Π_j (1 - |z_j-c_j|²/r_j²)⁴, so the coefficient
// vanishes to third order on the support boundary.

struct TestForm {
  int n = 1;
  Point center;
  std::vector<double> radii;
  Poly factor;  // polynomial prefactor (may involve z̄)
  Mask I = 0, J = 0;

  TestForm(int vars, Point c, std::vector<double> r, Poly f, Mask i, Mask j);

  int deg_holo() const { return alg::weight(I); }
  int deg_anti() const { return alg::weight(J); }

  double plateau(const Point& z) const;
  Cplx value(const Point& z) const;  // factor × plateau

  struct Jet {  // coefficient value with first and mixed second derivatives
    Cplx v;
    std::vector<Cplx> dz, dzb;
    std::vector<Cplx> dzdzb;  // row-major n×n: ∂_j ∂̄_k
  };
  Jet jet(const Point& z) const;

  TestForm conjugated() const;  // complex-conjugate form (swaps I and J)

  double sup_bound() const;  // rigorous upper bound for |value| on the support

 private:
  std::vector<Poly> fdz_, fdzb_, fdd_;  // factor derivatives (fdd_ row-major n×n)
};

// ∫ |value| dV over the support (plain product quadrature; the coefficient is
// smooth). Used to normalise verdict thresholds.
double test_form_l1(const TestForm& psi);

struct TestFormDictionary {
  std::vector<TestForm> members;

  // Twelve members of bidegree (a,b): supports centred at the weight's pole
  // candidates and at regular points, two size classes, constant and
  // per-coordinate linear prefactors; every monomial direction of the (a,b)
  // basis is paired with every prefactor variant at the leading centers.
  // Deterministic.
  static TestFormDictionary standard(const PolydiscDomain& dom, const ModelWeight& w,
                                     int a, int b);
};

// ---------------------------------------------------------------------------
// Forms with polynomial coefficients.

struct PolyForm {
  int n = 1, p = 0, q = 0;
  std::map<std::pair<Mask, Mask>, Poly> comps;

  PolyForm(int vars, int dp, int dq) : n(vars), p(dp), q(dq) {}

  static PolyForm monomial(int vars, Mask I, Mask J, Poly c);
  void add(Mask I, Mask J, const Poly& c);
  bool holomorphic_coefficients() const;
  PolyForm del() const;  // exact ∂ (z-derivatives with wedge signs)
};

// ∫_K Σ_{IJ} |u_{IJ}|² e^{-φ} dV; throws std::runtime_error when the
// refinement certifies divergence (u outside the weighted L² space).
double weighted_l2_mass(const PolyForm& u, const ModelWeight& w, const PolydiscDomain& K);

// ∫ (∂φ∧u)∧ψ over supp ψ for u with holomorphic polynomial coefficients.
Cplx wedge_with_holomorphic(const PolyForm& u, const ModelWeight& w, const TestForm& psi);

struct L2Pairing {
  Cplx value;
  double cs_bound;  // sup|ψ| · (∫e^φ|∂φ|²)^½ · (∫|u|²e^{-φ})^½ over supp ψ
};

// Same pairing for square-integrable u (any bidegree, polynomial
// coefficients), together with its Cauchy–Schwarz certificate.  Throws when
// the certificate is violated (internal inconsistency) or u is not in the
// weighted L² space.
L2Pairing wedge_with_l2(const PolyForm& u, const ModelWeight& w, const TestForm& psi);

struct CurrentVerdict {
  double max_pairing = 0.0;  // max over members of |pairing| / ‖member‖_{L¹}
  bool verdict = false;      // all pairings below the near-zero threshold
};

// Near-zero thresholds for the dictionary verdicts: a candidate passes when
// every normalised pairing is ≤ kNearZeroLevel; a genuine counterexample is
// expected to exceed kCounterexampleLevel.
inline constexpr double kNearZeroLevel = 1e-8;
inline constexpr double kCounterexampleLevel = 1e-2;

// Pairs ∂s + ∂φ∧s against every dictionary member (s holomorphic (p,0)).
CurrentVerdict parallel_current_check(const PolyForm& s, const ModelWeight& w,
                                      const TestFormDictionary& dict);

// Pairs (i∂∂̄φ)∧s against every member, moving both derivatives onto the
// test form so only φ itself is quadratured; pluriharmonic weights yield an
// exact zero.
CurrentVerdict curvature_wedge_check(const PolyForm& s, const ModelWeight& w,
                                     const TestFormDictionary& dict);

}  // namespace lefschetz::weights
