#pragma once
// Pointwise bigraded exterior algebra over an n-dimensional Hermitian fiber.
//
// Conventions fixed project-wide:
//   * orthonormal frame means ω = i Σ_j dz_j ∧ dz̄_j and the monomial basis
//     {dz_I ∧ dz̄_J} is orthonormal for the fiber inner product;
//   * with that pair of choices [L,Λ] = (p+q−n)·id holds exactly and the
//     (n,q) → (n−q,0) Lefschetz inverse is a signed coefficient transfer
//     with normalization i^q·q!;
//   * the sesquilinear pairing is {u,v} = i·u∧v̄·e^{−φ} (single factor i for
//     every bidegree; positivity is only meaningful for low degrees).
//
// Coefficients are templated: GaussianRational for exact paths, complex
// doubles elsewhere.  Operations are pure value transforms, safe to run from
// concurrent workers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lefschetz/combinatorics.hpp"
#include "lefschetz/rational.hpp"

namespace lefschetz::alg {

using Cplx = std::complex<double>;

template <class S>
struct scalar_ops;

template <>
struct scalar_ops<Cplx> {
  static Cplx zero() { return {0.0, 0.0}; }
  static Cplx one() { return {1.0, 0.0}; }
  static Cplx unit_im() { return {0.0, 1.0}; }
  static Cplx conj(const Cplx& c) { return std::conj(c); }
  static bool is_zero(const Cplx& c) { return c == Cplx{0.0, 0.0}; }
  static Cplx from_double(double d) { return {d, 0.0}; }
  static Cplx from_int(long v) { return {static_cast<double>(v), 0.0}; }
  static Cplx to_complex(const Cplx& c) { return c; }
};

template <>
struct scalar_ops<GaussianRational> {
  static GaussianRational zero() { return {}; }
  static GaussianRational one() { return {Rational(1), Rational(0)}; }
  static GaussianRational unit_im() { return GaussianRational::unit_im(); }
  static GaussianRational conj(const GaussianRational& c) { return c.conj(); }
  static bool is_zero(const GaussianRational& c) { return c.is_zero(); }
  static GaussianRational from_double(double d) { return {Rational(d), Rational(0)}; }
  static GaussianRational from_int(long v) { return {Rational(v), Rational(0)}; }
  static Cplx to_complex(const GaussianRational& c) { return c.to_complex(); }
};

struct CurvatureSpectrum {
  std::vector<double> lambdas;  // nondecreasing

  explicit CurvatureSpectrum(std::vector<double> l) : lambdas(std::move(l)) {
    for (std::size_t i = 1; i < lambdas.size(); ++i)
      if (lambdas[i - 1] > lambdas[i])
        throw std::invalid_argument("CurvatureSpectrum: eigenvalues must be nondecreasing");
  }
};

// J is a strictly increasing tuple of 1-based indices.
double bochner_weight(const std::vector<int>& J, const CurvatureSpectrum& spectrum);

struct HermitianFrame {
  int n = 0;
  // Row-major n×n Hermitian positive-definite ω_{jk}; empty ⇒ identity.
  std::vector<Cplx> omega;
  double weight_value = 0.0;  // φ(x); fiber metric factor is e^{−φ(x)}

  static HermitianFrame standard(int n, double weight_value = 0.0) {
    if (n < 1 || n > 6) throw std::invalid_argument("HermitianFrame: n must be in 1..6");
    HermitianFrame f;
    f.n = n;
    f.weight_value = weight_value;
    return f;
  }

  bool orthonormal() const {
    if (omega.empty()) return true;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (omega[j * n + k] != (j == k ? Cplx{1, 0} : Cplx{0, 0})) return false;
    return true;
  }
};

template <class S>
struct BigradedForm {
  int n = 0, p = 0, q = 0;
  std::map<std::pair<Mask, Mask>, S> terms;

  BigradedForm() = default;
  BigradedForm(int n_, int p_, int q_) : n(n_), p(p_), q(q_) {
    if (n < 1 || n > 6) throw std::invalid_argument("BigradedForm: n must be in 1..6");
    if (p < 0 || q < 0 || p > n || q > n)
      throw std::invalid_argument("BigradedForm: bidegree out of range");
  }

  static BigradedForm monomial(int n, Mask I, Mask J, S coeff) {
    BigradedForm f(n, weight(I), weight(J));
    f.add(I, J, std::move(coeff));
    return f;
  }

  void add(Mask I, Mask J, const S& c) {
    if (weight(I) != p || weight(J) != q)
      throw std::invalid_argument("BigradedForm: term masks do not match bidegree");
    auto it = terms.find({I, J});
    if (it == terms.end()) {
      if (!scalar_ops<S>::is_zero(c)) terms.emplace(std::make_pair(I, J), c);
    } else {
      it->second += c;
      if (scalar_ops<S>::is_zero(it->second)) terms.erase(it);
    }
  }

  S coefficient(Mask I, Mask J) const {
    auto it = terms.find({I, J});
    return it == terms.end() ? scalar_ops<S>::zero() : it->second;
  }

  bool is_zero() const { return terms.empty(); }

  BigradedForm operator-() const {
    BigradedForm f = *this;
    for (auto& [k, c] : f.terms) c = -c;
    return f;
  }

  friend BigradedForm operator+(const BigradedForm& a, const BigradedForm& b) {
    // A zero form acts as the additive identity in any bidegree.
    if (a.terms.empty() && (a.p != b.p || a.q != b.q)) return b;
    if (b.terms.empty() && (a.p != b.p || a.q != b.q)) return a;
    if (a.n != b.n || a.p != b.p || a.q != b.q)
      throw std::invalid_argument("BigradedForm: mismatched bidegrees in sum");
    BigradedForm f = a;
    for (const auto& [k, c] : b.terms) f.add(k.first, k.second, c);
    return f;
  }
  friend BigradedForm operator-(const BigradedForm& a, const BigradedForm& b) { return a + (-b); }

  BigradedForm scaled(const S& s) const {
    BigradedForm f(n, p, q);
    for (const auto& [k, c] : terms) f.add(k.first, k.second, c * s);
    return f;
  }
};

template <class S>
double max_coeff_abs(const BigradedForm<S>& u) {
  double m = 0;
  for (const auto& [k, c] : u.terms) m = std::max(m, std::abs(scalar_ops<S>::to_complex(c)));
  return m;
}

// ---------------------------------------------------------------------------
// Exterior product with graded signs.  dz_I∧dz̄_J ∧ dz_K∧dz̄_L picks up
// (−1)^{|J||K|} moving dz_K across dz̄_J, then the two merge signs.
template <class S>
BigradedForm<S> wedge(const BigradedForm<S>& u, const BigradedForm<S>& v) {
  if (u.n != v.n) throw std::invalid_argument("wedge: mismatched fiber dimension");
  int p = u.p + v.p, q = u.q + v.q;
  if (p > u.n || q > u.n)
    throw std::invalid_argument("wedge: resulting bidegree (" + std::to_string(p) + "," +
                                std::to_string(q) + ") exceeds (n,n) with n=" + std::to_string(u.n));
  BigradedForm<S> out(u.n, p, q);
  for (const auto& [ku, cu] : u.terms) {
    for (const auto& [kv, cv] : v.terms) {
      Mask I1 = ku.first, J1 = ku.second, I2 = kv.first, J2 = kv.second;
      if ((I1 & I2) || (J1 & J2)) continue;
      int sign = merge_sign(I1, I2) * merge_sign(J1, J2);
      if ((weight(J1) * weight(I2)) & 1) sign = -sign;
      S c = cu * cv;
      if (sign < 0) c = -c;
      out.add(I1 | I2, J1 | J2, c);
    }
  }
  return out;
}

// Interior product with the (1,0) tangent vector ξ = Σ_j ξ_j ∂/∂z_j.
template <class S>
BigradedForm<S> contract(const std::vector<S>& xi, const BigradedForm<S>& v) {
  if (static_cast<int>(xi.size()) != v.n)
    throw std::invalid_argument("contract: tangent vector has wrong dimension");
  if (v.p < 1) throw std::invalid_argument("contract: form has no dz factors (p = 0)");
  BigradedForm<S> out(v.n, v.p - 1, v.q);
  for (const auto& [k, c] : v.terms) {
    Mask I = k.first;
    for (Mask rest = I; rest;) {
      int j = std::countr_zero(rest);
      rest &= rest - 1;
      if (scalar_ops<S>::is_zero(xi[j])) continue;
      S term = xi[j] * c;
      if (position_in(I, j) & 1) term = -term;
      out.add(I & ~(Mask{1} << j), k.second, term);
    }
  }
  return out;
}

// Contraction with the antiholomorphic tangent vector Σ_j xi_j ∂/∂z̄_j.
// The interior product first crosses all p dz factors, hence the extra (−1)^p.
template <class S>
BigradedForm<S> contract_bar(const std::vector<S>& xi, const BigradedForm<S>& v) {
  if (static_cast<int>(xi.size()) != v.n)
    throw std::invalid_argument("contract_bar: tangent vector has wrong dimension");
  if (v.q < 1) throw std::invalid_argument("contract_bar: form has no dz̄ factors (q = 0)");
  BigradedForm<S> out(v.n, v.p, v.q - 1);
  for (const auto& [k, c] : v.terms) {
    Mask J = k.second;
    for (Mask rest = J; rest;) {
      int j = std::countr_zero(rest);
      rest &= rest - 1;
      if (scalar_ops<S>::is_zero(xi[j])) continue;
      S term = xi[j] * c;
      if ((v.p + position_in(J, j)) & 1) term = -term;
      out.add(k.first, J & ~(Mask{1} << j), term);
    }
  }
  return out;
}

template <class S>
BigradedForm<S> conj_form(const BigradedForm<S>& u) {
  BigradedForm<S> out(u.n, u.q, u.p);
  for (const auto& [k, c] : u.terms) {
    S v = scalar_ops<S>::conj(c);
    if ((u.p * u.q) & 1) v = -v;
    out.add(k.second, k.first, v);
  }
  return out;
}

// Wedge with the general (1,1)-form i Σ_{jk} w_{jk} dz_j ∧ dz̄_k.
template <class S>
BigradedForm<S> one_one_wedge(const std::vector<S>& w, const BigradedForm<S>& u) {
  int n = u.n;
  if (static_cast<int>(w.size()) != n * n)
    throw std::invalid_argument("one_one_wedge: matrix size mismatch");
  if (u.p >= n || u.q >= n)  // ω ∧ u vanishes beyond top degree
    return BigradedForm<S>(n, std::min(u.p + 1, n), std::min(u.q + 1, n));
  BigradedForm<S> out(n, u.p + 1, u.q + 1);
  const S im = scalar_ops<S>::unit_im();
  for (const auto& [k, c] : u.terms) {
    Mask I = k.first, J = k.second;
    for (int j = 0; j < n; ++j) {
      if (I & (Mask{1} << j)) continue;
      for (int l = 0; l < n; ++l) {
        if (J & (Mask{1} << l)) continue;
        const S& wjl = w[j * n + l];
        if (scalar_ops<S>::is_zero(wjl)) continue;
        // (dz_j ∧ dz̄_l) ∧ dz_I∧dz̄_J: dz̄_l crosses dz_I, then both insert.
        int sign = insertion_sign(I, j) * insertion_sign(J, l);
        if (u.p & 1) sign = -sign;
        S term = im * wjl * c;
        if (sign < 0) term = -term;
        out.add(I | (Mask{1} << j), J | (Mask{1} << l), term);
      }
    }
  }
  return out;
}

namespace detail {
template <class S>
std::vector<S> identity_matrix(int n) {
  std::vector<S> w(static_cast<std::size_t>(n) * n, scalar_ops<S>::zero());
  for (int j = 0; j < n; ++j) w[j * n + j] = scalar_ops<S>::one();
  return w;
}
}  // namespace detail

// L(u) = ω ∧ u in the orthonormal frame.
template <class S>
BigradedForm<S> lefschetz_L_orthonormal(const BigradedForm<S>& u) {
  return one_one_wedge(detail::identity_matrix<S>(u.n), u);
}

// Λ(u): pointwise adjoint of L for the orthonormal frame inner product in
// which the monomial basis is orthonormal.  Coefficientwise
//   Λ(dz_I∧dz̄_J) = Σ_{j ∈ I∩J} conj(i·σ_j) dz_{I∖j}∧dz̄_{J∖j},
// with σ_j the real sign L produces on the complementary monomial.
template <class S>
BigradedForm<S> lambda_dual_orthonormal(const BigradedForm<S>& u) {
  if (u.p == 0 || u.q == 0) return BigradedForm<S>(u.n, std::max(u.p - 1, 0), std::max(u.q - 1, 0));
  BigradedForm<S> out(u.n, u.p - 1, u.q - 1);
  const S minus_im = -scalar_ops<S>::unit_im();
  for (const auto& [k, c] : u.terms) {
    Mask I = k.first, J = k.second;
    for (Mask rest = I & J; rest;) {
      int j = std::countr_zero(rest);
      rest &= rest - 1;
      Mask Ir = I & ~(Mask{1} << j), Jr = J & ~(Mask{1} << j);
      int sign = insertion_sign(Ir, j) * insertion_sign(Jr, j);
      if (weight(Ir) & 1) sign = -sign;
      S term = minus_im * c;
      if (sign < 0) term = -term;
      out.add(Ir, Jr, term);
    }
  }
  return out;
}

// ω^q as an exact form (coefficients i^q·q!·(±1) on disjoint index pairs).
template <class S>
BigradedForm<S> omega_power(int n, int q) {
  BigradedForm<S> acc(n, 0, 0);
  acc.add(0, 0, scalar_ops<S>::one());
  for (int step = 0; step < q; ++step) acc = lefschetz_L_orthonormal(acc);
  return acc;
}

// Unique α of bidegree (n−q,0) with ω^q ∧ α = β, for β of bidegree (n,q).
// Each β-term dz_{1..n}∧dz̄_J receives from exactly one α-monomial dz_{J^c};
// the transfer constant is read off ω^q ∧ dz_{J^c} computed in the algebra.
template <class S>
BigradedForm<S> lefschetz_inverse_orthonormal(const BigradedForm<S>& beta) {
  int n = beta.n, q = beta.q;
  if (beta.p != n)
    throw std::invalid_argument("lefschetz_inverse: input must have bidegree (n,q)");
  const Mask full = (Mask{1} << n) - 1;
  BigradedForm<S> alpha(n, n - q, 0);
  BigradedForm<S> wq = omega_power<S>(n, q);
  for (const auto& [k, c] : beta.terms) {
    Mask J = k.second;
    Mask I = full & ~J;
    BigradedForm<S> image = wedge(wq, BigradedForm<S>::monomial(n, I, 0, scalar_ops<S>::one()));
    S lambda = image.coefficient(full, J);
    if (scalar_ops<S>::is_zero(lambda))
      throw std::logic_error("lefschetz_inverse: degenerate transfer coefficient");
    alpha.add(I, 0, c / lambda);
  }
  return alpha;
}

// Frame-aware entry points.  Non-orthonormal ω is reduced to the orthonormal
// case by a triangular (Cholesky-style) coframe change; complex-double only.
BigradedForm<Cplx> lefschetz_L(const BigradedForm<Cplx>& u, const HermitianFrame& frame);
BigradedForm<Cplx> lambda_dual(const BigradedForm<Cplx>& u, const HermitianFrame& frame);
BigradedForm<Cplx> lefschetz_inverse(const BigradedForm<Cplx>& beta, const HermitianFrame& frame);
BigradedForm<Cplx> pairing(const BigradedForm<Cplx>& u, const BigradedForm<Cplx>& v,
                           const HermitianFrame& frame);

template <class S>
BigradedForm<S> lefschetz_L(const BigradedForm<S>& u, const HermitianFrame& frame) {
  if (!frame.orthonormal())
    throw std::invalid_argument("lefschetz_L: exact path requires the orthonormal frame");
  return lefschetz_L_orthonormal(u);
}

template <class S>
BigradedForm<S> lambda_dual(const BigradedForm<S>& u, const HermitianFrame& frame) {
  if (!frame.orthonormal())
    throw std::invalid_argument("lambda_dual: exact path requires the orthonormal frame");
  return lambda_dual_orthonormal(u);
}

template <class S>
BigradedForm<S> lefschetz_inverse(const BigradedForm<S>& beta, const HermitianFrame& frame) {
  if (!frame.orthonormal())
    throw std::invalid_argument("lefschetz_inverse: exact path requires the orthonormal frame");
  return lefschetz_inverse_orthonormal(beta);
}

// {u,v} = i·u∧v̄·e^{−φ}; the metric factor enters through the frame.
template <class S>
BigradedForm<S> pairing_orthonormal(const BigradedForm<S>& u, const BigradedForm<S>& v,
                                    double weight_value) {
  BigradedForm<S> w = wedge(u, conj_form(v));
  S factor = scalar_ops<S>::unit_im() * scalar_ops<S>::from_double(std::exp(-weight_value));
  return w.scaled(factor);
}

// Coframe substitution dz_j ↦ Σ_k A_{jk} ε_k (dz̄ via the conjugate matrix).
template <class S>
BigradedForm<S> change_coframe(const BigradedForm<S>& u, const std::vector<S>& A) {
  int n = u.n;
  BigradedForm<S> out(n, u.p, u.q);
  for (const auto& [k, c] : u.terms) {
    BigradedForm<S> acc(n, 0, 0);
    acc.add(0, 0, c);
    for (int j : indices_from_mask(k.first)) {
      BigradedForm<S> row(n, 1, 0);
      for (int l = 0; l < n; ++l) row.add(Mask{1} << l, 0, A[(j - 1) * n + l]);
      acc = wedge(acc, row);
    }
    for (int j : indices_from_mask(k.second)) {
      BigradedForm<S> row(n, 0, 1);
      for (int l = 0; l < n; ++l) row.add(0, Mask{1} << l, scalar_ops<S>::conj(A[(j - 1) * n + l]));
      acc = wedge(acc, row);
    }
    for (const auto& [kk, cc] : acc.terms) out.add(kk.first, kk.second, cc);
  }
  return out;
}

}  // namespace lefschetz::alg
