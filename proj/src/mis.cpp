#include "lefschetz/mis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace lefschetz::mis {

namespace {

using weights::Poly;

constexpr double kTwoPi = 6.283185307179586476925286766559;

Rational pow_rational(const Rational& x, int e) {
  Rational out(1);
  for (int i = 0; i < e; ++i) out *= x;
  return out;
}

std::string fmt_cplx(Cplx v) {
  std::ostringstream os;
  os << std::setprecision(12);
  if (std::abs(v.imag()) < 1e-14) {
    os << v.real();
    return os.str();
  }
  os << '(' << v.real() << (v.imag() < 0 ? " - " : " + ") << std::abs(v.imag()) << "i)";
  return os.str();
}

bool divides(const std::vector<int>& a, const std::vector<int>& b) {
  for (size_t j = 0; j < a.size(); ++j)
    if (a[j] > b[j]) return false;
  return true;
}

bool shift_equal(const Point& a, const Point& b) {
  auto at = [](const Point& p, size_t j) { return j < p.size() ? p[j] : Cplx{}; };
  size_t m = std::max(a.size(), b.size());
  for (size_t j = 0; j < m; ++j)
    if (std::abs(at(a, j) - at(b, j)) > 1e-12) return false;
  return true;
}

// --------------------------------------------------------------- recognition

// λ·(z_v − root)^mult, detected from the exact binomial expansion of a
// univariate holomorphic factor.  Constants come back with mult = 0.
struct UnivariatePower {
  int var = 0;
  int mult = 0;
  Cplx root{};
};

UnivariatePower recognize_power(const Poly& p) {
  int v = p.only_variable();
  if (v < 0)
    throw std::invalid_argument(
        "staircase multiplier ideals: singular factors must depend on a single variable");
  if (v == 0) return {};
  int var = 0;
  std::vector<Cplx> c = p.univariate_coefficients(&var);
  int m = static_cast<int>(c.size()) - 1;
  if (m == 0) return {};
  Cplx lead = c[m];
  Cplx root = -c[m - 1] / (lead * static_cast<double>(m));
  double binom = 1.0;
  for (int k = m; k >= 0; --k) {
    Cplx expect = lead * binom * std::pow(-root, static_cast<double>(m - k));
    double scale = std::abs(lead) * binom * std::pow(std::max(1.0, std::abs(root)), m - k);
    if (std::abs(c[k] - expect) > 1e-9 * scale + 1e-12)
      throw std::invalid_argument(
          "staircase multiplier ideals: singular factors must be powers of a linear form");
    if (k > 0) binom = binom * k / static_cast<double>(m - k + 1);
  }
  return {var, m, root};
}

// --------------------------------------------------------------- weight model

struct DivisorModel {
  std::vector<Rational> alpha;  // per coordinate
};

// a·log|z_zv − tz| + log(|z_zv − tz|^b + |z_wv − tw|^c); tz ≠ 0 only when a = 0.
struct BranchModel {
  Rational a, b, c;
  int zv = 1, wv = 2;
  Cplx tz{}, tw{};
};

using Model = std::variant<DivisorModel, BranchModel>;

Model classify(const ModelWeight& w) {
  int n = w.dim();
  if (n > 2)
    throw std::invalid_argument(
        "staircase multiplier ideals: weights in three or more variables are not supported");

  std::vector<Rational> alpha(n, Rational(0));
  for (const auto& lt : w.log_terms()) {
    UnivariatePower up = recognize_power(lt.p);
    if (up.mult == 0) continue;  // bounded factor
    if (std::abs(up.root) > 1e-12)
      throw std::invalid_argument(
          "staircase multiplier ideals: divisor factors must vanish on a coordinate axis");
    alpha[up.var - 1] += lt.c * Rational(up.mult);
  }

  std::vector<const weights::LogPairTerm*> branches;
  for (const auto& pt : w.log_pair_terms()) branches.push_back(&pt);
  if (branches.empty()) return DivisorModel{std::move(alpha)};
  if (branches.size() > 1)
    throw std::invalid_argument(
        "staircase multiplier ideals: at most one branch factor is supported");
  const auto& pt = *branches.front();

  UnivariatePower u1 = recognize_power(pt.p1);
  UnivariatePower u2 = recognize_power(pt.p2);
  if (u1.mult == 0 || u2.mult == 0)
    return DivisorModel{std::move(alpha)};  // a bounded side makes the whole term bounded
  if (n != 2 || u1.var == u2.var)
    throw std::invalid_argument(
        "staircase multiplier ideals: a branch factor must couple two distinct variables");

  bool has1 = alpha[u1.var - 1] > 0, has2 = alpha[u2.var - 1] > 0;
  if (has1 && has2)
    throw std::invalid_argument(
        "staircase multiplier ideals: divisor weight on both variables cannot be combined "
        "with a branch factor");
  const UnivariatePower& zu = has2 ? u2 : u1;
  const UnivariatePower& wu = has2 ? u1 : u2;
  const Rational& bz = has2 ? pt.b2 : pt.b1;
  const Rational& bw = has2 ? pt.b1 : pt.b2;

  BranchModel m;
  m.zv = zu.var;
  m.wv = wu.var;
  m.a = alpha[zu.var - 1];
  m.b = pt.c * bz * Rational(zu.mult);
  m.c = pt.c * bw * Rational(wu.mult);
  m.tz = zu.root;
  m.tw = wu.root;
  if (m.a > 0 && std::abs(m.tz) > 1e-12)
    throw std::invalid_argument(
        "staircase multiplier ideals: the branch factor must vanish where the divisor "
        "factor does");
  return m;
}

// ------------------------------------------------------------ exact staircases

// Membership of z^p w^q in I(tφ) for the branch model:
//   p+1 > ta   and   c(p+1−ta) + b(q+1) > t·b·c.
// The generators below are the corners of that staircase; q_p is the least
// admissible q at column p.
StaircaseIdeal ray_ideal(const BranchModel& m, const Rational& t, int nvars) {
  Rational ta = t * m.a;
  // p+1 > ta ⇔ p ≥ ⌊ta⌋ (for ta ∈ ℤ the boundary collapses to p ≥ ta = ⌊ta⌋).
  long pmin = std::max(0L, floor_long(ta));

  std::vector<std::vector<int>> gens;
  for (long p = pmin;; ++p) {
    // least q with q+1 > h := c·(t − (p+1−ta)/b); same floor collapse at h ∈ ℤ
    Rational h = m.c * (t - (Rational(p + 1) - ta) / m.b);
    long q = h < 0 ? 0 : std::max(0L, floor_long(h));
    std::vector<int> g(nvars, 0);
    g[m.zv - 1] = static_cast<int>(p);
    g[m.wv - 1] = static_cast<int>(q);
    gens.push_back(std::move(g));
    if (q == 0) break;
  }
  Point shift(nvars, Cplx{});
  shift[m.zv - 1] = m.tz;
  shift[m.wv - 1] = m.tw;
  return StaircaseIdeal::make(nvars, std::move(gens), std::move(shift));
}

StaircaseIdeal ray_ideal(const DivisorModel& m, const Rational& t) {
  std::vector<int> e;
  for (const Rational& al : m.alpha) e.push_back(static_cast<int>(floor_long(t * al)));
  return StaircaseIdeal::make(static_cast<int>(m.alpha.size()), {std::move(e)});
}

StaircaseIdeal ray_ideal(const Model& m, const Rational& t, int nvars) {
  if (const auto* d = std::get_if<DivisorModel>(&m)) return ray_ideal(*d, t);
  return ray_ideal(std::get<BranchModel>(m), t, nvars);
}

std::vector<Rational> model_jumps(const Model& model, const Rational& tmax) {
  std::vector<Rational> out;
  if (const auto* d = std::get_if<DivisorModel>(&model)) {
    for (const Rational& al : d->alpha) {
      if (!(al > 0)) continue;
      for (long mm = 1;; ++mm) {
        Rational tj = Rational(mm) / al;
        if (tj > tmax) break;
        out.push_back(tj);
      }
    }
  } else {
    const auto& m = std::get<BranchModel>(model);
    // Exit time of z^p w^q: min( (p+1)/a , (c(p+1)+b(q+1)) / (c(a+b)) ); the
    // grid below covers every monomial that can exit by tmax.
    long pmax = floor_long(tmax * (m.a + m.b)) + 1;
    long qmax = floor_long(tmax * m.c * (m.a + m.b) / m.b) + 1;
    for (long p = 0; p <= pmax; ++p) {
      for (long q = 0; q <= qmax; ++q) {
        Rational tk = (m.c * Rational(p + 1) + m.b * Rational(q + 1)) / (m.c * (m.a + m.b));
        Rational texit = tk;
        if (m.a > 0) {
          Rational tp = Rational(p + 1) / m.a;
          if (tp < texit) texit = tp;
        }
        if (texit > 0 && texit <= tmax) out.push_back(texit);
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Point origin(int n) { return Point(n, Cplx{}); }

}  // namespace

// --------------------------------------------------------------- StaircaseIdeal

StaircaseIdeal StaircaseIdeal::make(int vars, std::vector<std::vector<int>> gens, Point shift) {
  if (vars < 1 || vars > 3)
    throw std::invalid_argument("StaircaseIdeal: between one and three variables");
  if (gens.empty()) throw std::invalid_argument("StaircaseIdeal: at least one generator");
  for (const auto& g : gens) {
    if (static_cast<int>(g.size()) != vars)
      throw std::invalid_argument("StaircaseIdeal: generator arity mismatch");
    for (int e : g)
      if (e < 0) throw std::invalid_argument("StaircaseIdeal: negative exponent");
  }
  if (!shift.empty() && static_cast<int>(shift.size()) != vars)
    throw std::invalid_argument("StaircaseIdeal: translation point arity mismatch");

  std::sort(gens.begin(), gens.end());
  gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
  std::vector<std::vector<int>> minimal;
  for (size_t i = 0; i < gens.size(); ++i) {
    bool redundant = false;
    for (size_t j = 0; j < gens.size() && !redundant; ++j)
      if (j != i && divides(gens[j], gens[i])) redundant = gens[j] != gens[i] || j < i;
    if (!redundant) minimal.push_back(gens[i]);
  }

  bool trivial_shift = true;
  for (Cplx s : shift) trivial_shift = trivial_shift && std::abs(s) < 1e-14;
  StaircaseIdeal out;
  out.vars = vars;
  out.gens = std::move(minimal);
  if (!trivial_shift) out.shift = std::move(shift);
  return out;
}

StaircaseIdeal StaircaseIdeal::unit(int vars) {
  return make(vars, {std::vector<int>(vars, 0)});
}

bool StaircaseIdeal::is_unit() const {
  return gens.size() == 1 && *std::max_element(gens[0].begin(), gens[0].end()) == 0;
}

bool StaircaseIdeal::contains_monomial(const std::vector<int>& expo) const {
  if (static_cast<int>(expo.size()) != vars)
    throw std::invalid_argument("StaircaseIdeal: exponent arity mismatch");
  for (const auto& g : gens)
    if (divides(g, expo)) return true;
  return false;
}

bool StaircaseIdeal::contains(const StaircaseIdeal& other) const {
  if (vars != other.vars)
    throw std::invalid_argument("StaircaseIdeal: comparing ideals in different rings");
  if (!shift_equal(shift, other.shift))
    throw std::invalid_argument("StaircaseIdeal: comparing stalks at different points");
  for (const auto& g : other.gens)
    if (!contains_monomial(g)) return false;
  return true;
}

bool StaircaseIdeal::operator==(const StaircaseIdeal& o) const {
  return vars == o.vars && gens == o.gens && shift_equal(shift, o.shift);
}

std::string StaircaseIdeal::to_string() const {
  static const char* names[] = {"z", "w", "v"};
  std::ostringstream os;
  os << '(';
  for (size_t i = 0; i < gens.size(); ++i) {
    if (i) os << ", ";
    const auto& g = gens[i];
    bool any = false;
    for (int j = 0; j < vars; ++j) {
      if (g[j] == 0) continue;
      if (any) os << '*';
      any = true;
      bool shifted = j < static_cast<int>(shift.size()) && std::abs(shift[j]) > 1e-14;
      if (shifted) {
        Cplx s = shift[j];
        bool neg = std::abs(s.imag()) < 1e-14 && s.real() < 0;
        os << '(' << names[j] << (neg ? " + " : " - ") << fmt_cplx(neg ? -s : s) << ')';
      } else {
        os << names[j];
      }
      if (g[j] > 1) os << '^' << g[j];
    }
    if (!any) os << '1';
  }
  os << ')';
  return os.str();
}

// ------------------------------------------------------------- closed forms

StaircaseIdeal divisor_ideal(const std::vector<Rational>& alpha) {
  if (alpha.empty())
    throw std::invalid_argument("divisor ideal: needs at least one coefficient");
  if (alpha.size() > 2)
    throw std::invalid_argument(
        "divisor ideal: weights in three or more variables are not supported");
  for (const Rational& a : alpha)
    if (a < 0) throw std::invalid_argument("divisor ideal: negative divisor coefficient");
  return ray_ideal(DivisorModel{alpha}, Rational(1));
}

void BranchParams::validate() const {
  if (!(a > 0) || !(b > 0) || !(c > 0))
    throw std::invalid_argument("branch weight: parameters a, b, c must be positive");
  if (is_integer(a))
    throw std::invalid_argument("branch weight: parameter a must not be an integer");
  Rational frac = rational_ceil(a) - a;  // ⌈a⌉ − a ∈ (0,1)
  if (!(frac < b))
    throw std::invalid_argument("branch weight: requires ceil(a) - a < b (got ceil(a) - a = " +
                                rational_to_string(frac) + ", b = " + rational_to_string(b) + ")");
  if (!(b < 1)) throw std::invalid_argument("branch weight: requires b < 1");
  if (is_integer(c * (1 - frac / b)))
    throw std::invalid_argument(
        "branch weight: threshold c(1 - (ceil(a) - a)/b) must not be an integer");
}

StaircaseIdeal branch_ideal(const BranchParams& p) {
  p.validate();
  long p0 = ceil_long(p.a) - 1;
  long q0 = floor_long(p.c * (1 - (rational_ceil(p.a) - p.a) / p.b));
  return StaircaseIdeal::make(
      2, {{static_cast<int>(p0 + 1), 0}, {static_cast<int>(p0), static_cast<int>(q0)}});
}

// --------------------------------------------------------- weight entry points

StaircaseIdeal ideal_of_weight(const ModelWeight& w) {
  return ray_ideal(classify(w), Rational(1), w.dim());
}

StaircaseIdeal scaled_ideal(const ModelWeight& w, const Rational& t) {
  if (!(t > 0)) throw std::invalid_argument("scaled ideal: scaling must be positive");
  Model m = classify(w);
  const Rational guard(1, 1000000000);
  for (const Rational& s : model_jumps(m, t + 1)) {
    if (abs(t - s) < guard)
      throw std::invalid_argument("threshold ambiguity: t = " + rational_to_string(t) +
                                  " lies within 1e-9 of the jump threshold " +
                                  rational_to_string(s));
  }
  return ray_ideal(m, t, w.dim());
}

std::vector<Rational> jumping_numbers(const ModelWeight& w, const Rational& tmax) {
  if (!(tmax > 0)) throw std::invalid_argument("jumping numbers: range must be nonempty");
  return model_jumps(classify(w), tmax);
}

StaircaseIdeal lower_regularization(const ModelWeight& w) {
  Model m = classify(w);
  Rational below(0);
  for (const Rational& s : model_jumps(m, Rational(1)))
    if (s < 1 && s > below) below = s;
  Rational t = (below + 1) / 2;  // strictly inside the last jump-free interval
  return ray_ideal(m, t, w.dim());
}

// -------------------------------------------------------------- cluster family

ClusterFamily ClusterFamily::standard(int K) {
  if (K < 1 || K > 40)
    throw std::invalid_argument("cluster family: truncation size must be between 1 and 40");
  ClusterFamily f;
  for (int k = 1; k <= K; ++k) {
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, static_cast<unsigned long>(k + 1));
    f.points.emplace_back(mpz_class(1), den);
    mpz_class dene;
    mpz_ui_pow_ui(dene.get_mpz_t(), 2, static_cast<unsigned long>(k));
    f.eps.emplace_back(mpz_class(1), dene);
    f.expo.push_back(3L << (k - 1));
  }
  return f;
}

void ClusterFamily::validate() const {
  size_t K = points.size();
  if (K == 0) throw std::invalid_argument("cluster family: needs at least one point");
  if (eps.size() != K || expo.size() != K)
    throw std::invalid_argument("cluster family: points, eps and expo must have equal length");
  for (size_t k = 0; k < K; ++k) {
    if (points[k] == 0) throw std::invalid_argument("cluster family: points must be nonzero");
    if (!(abs(points[k]) < Rational(1, 2)))
      throw std::invalid_argument("cluster family: points must satisfy |a_k| < 1/2");
    if (!(eps[k] > 0)) throw std::invalid_argument("cluster family: eps must be positive");
    if (expo[k] < 1)
      throw std::invalid_argument("cluster family: exponents must be positive integers");
    Rational strength = eps[k] * Rational(expo[k]);
    if (!(strength > 1))
      throw std::invalid_argument("cluster family: branch strength N_k eps_k must exceed 1");
    if (is_integer(strength))
      throw std::invalid_argument(
          "cluster family: branch strength N_k eps_k must not be an integer");
  }
  for (size_t i = 0; i < K; ++i)
    for (size_t j = i + 1; j < K; ++j)
      if (points[i] == points[j])
        throw std::invalid_argument("cluster family: points must be distinct");
}

ModelWeight ClusterFamily::weight() const {
  validate();
  ModelWeight w(2);
  w.add_log(Rational(1), Poly::variable(2, 1));
  for (size_t k = 0; k < points.size(); ++k) {
    Poly p2 = Poly::variable(2, 2) - Poly::constant(2, Cplx(to_double(points[k]), 0.0));
    w.add_log_pair(eps[k], Rational(1), Poly::variable(2, 1), Rational(expo[k]), std::move(p2));
  }
  return w;
}

StaircaseIdeal cluster_stalk(const ClusterFamily& f, int k, const Rational& delta) {
  f.validate();
  if (k < 1 || k > f.size())
    throw std::invalid_argument("cluster stalk: index out of range");
  if (!(delta > 0)) throw std::invalid_argument("cluster stalk: delta must be positive");
  Rational strength = f.eps[k - 1] * Rational(f.expo[k - 1]);
  Rational scaled = strength * (1 - 2 * delta);
  if (is_integer(scaled))
    throw std::invalid_argument("threshold ambiguity: N_k eps_k (1-2 delta) is an integer");
  long q = floor_long(scaled);
  if (q < 1)
    throw std::invalid_argument(
        "cluster stalk: regularization step too large, the transverse generator exponent "
        "floor(N_k eps_k (1-2 delta)) drops below 1");
  Point shift{Cplx{}, Cplx(to_double(f.points[k - 1]), 0.0)};
  return StaircaseIdeal::make(2, {{1, 0}, {0, static_cast<int>(q)}}, std::move(shift));
}

CoherenceReport coherence_diagnostic(const ClusterFamily& f, int degree) {
  f.validate();
  if (degree < 0) throw std::invalid_argument("coherence diagnostic: degree must be >= 0");
  int K = f.size();
  if (K < degree + 2)
    throw std::invalid_argument(
        "coherence diagnostic: needs at least degree + 2 cluster points");

  // Vanishing conditions for a univariate polynomial of degree ≤ d at the K
  // points: the Vandermonde system.  Trivial kernel ⇒ any candidate section
  // restricted to {z = 0} is forced to vanish, hence is divisible by z.
  int cols = degree + 1;
  std::vector<std::vector<Rational>> M(K, std::vector<Rational>(cols));
  for (int k = 0; k < K; ++k)
    for (int j = 0; j < cols; ++j) M[k][j] = pow_rational(f.points[k], j);

  int rank = 0;
  for (int col = 0; col < cols && rank < K; ++col) {
    int piv = -1;
    for (int r = rank; r < K; ++r)
      if (M[r][col] != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    std::swap(M[rank], M[piv]);
    for (int r = rank + 1; r < K; ++r) {
      if (M[r][col] == 0) continue;
      Rational factor = M[r][col] / M[rank][col];
      for (int cc = col; cc < cols; ++cc) M[r][cc] -= factor * M[rank][cc];
    }
    ++rank;
  }

  CoherenceReport rep;
  rep.degree = degree;
  rep.kernel_dimension = cols - rank;
  rep.witness_index = 1;
  rep.witness_power = static_cast<int>(floor_long(f.eps[0] * Rational(f.expo[0])));
  rep.verdict = rep.kernel_dimension == 0 ? "non-coherent witness found"
                                          : "inconclusive: vanishing conditions underdetermined";
  return rep;
}

// ------------------------------------------------------------- numeric probes

bool monomial_integrability_probe(const ModelWeight& w, const Rational& t,
                                  const std::vector<int>& expo, const Point& at,
                                  double radius) {
  int n = w.dim();
  if (n < 1 || n > 2)
    throw std::invalid_argument("integrability probe: one or two variables only");
  if (static_cast<int>(expo.size()) != n || static_cast<int>(at.size()) != n)
    throw std::invalid_argument("integrability probe: arity mismatch");
  for (int e : expo)
    if (e < 0) throw std::invalid_argument("integrability probe: negative exponent");
  if (!(t > 0)) throw std::invalid_argument("integrability probe: scaling must be positive");
  if (!(radius > 0) || radius > 0.5)
    throw std::invalid_argument("integrability probe: radius must lie in (0, 1/2]");

  const double td = to_double(t);
  const int L = 48, W = 12;
  const int A = n == 2 ? 6 : 16;
  const double aw = kTwoPi / A;

  // Shell midpoint radius and width at dyadic level i.
  auto mid = [&](int i) { return radius * 3.0 * std::ldexp(1.0, -i - 2); };
  auto wid = [&](int i) { return radius * std::ldexp(1.0, -i - 1); };

  // log of the quadrature sum over one box of shell levels (box in log-space).
  auto log_box = [&](const std::vector<int>& lev) {
    double base = 0.0;
    for (int j = 0; j < n; ++j)
      base += 2.0 * expo[j] * std::log(mid(lev[j])) + std::log(mid(lev[j]) * wid(lev[j]) * aw);
    // angular sum of e^{−2tφ}, log-sum-exp with running max
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> vals;
    Point z(n);
    std::vector<int> ang(n, 0);
    while (true) {
      for (int j = 0; j < n; ++j)
        z[j] = at[j] + std::polar(mid(lev[j]), aw * (ang[j] + 0.5));
      double lg = -2.0 * td * w.eval(z);
      vals.push_back(lg);
      mx = std::max(mx, lg);
      int j = 0;
      while (j < n && ++ang[j] == A) ang[j++] = 0;
      if (j == n) break;
    }
    double s = 0.0;
    for (double v : vals) s += std::exp(v - mx);
    return base + mx + std::log(s);
  };

  std::vector<double> logT(L, -std::numeric_limits<double>::infinity());
  for (int lev = 0; lev < L; ++lev) {
    std::vector<double> boxes;
    if (n == 1) {
      boxes.push_back(log_box({lev}));
    } else {
      for (int i = 0; i <= lev; ++i) boxes.push_back(log_box({i, lev}));
      for (int j = 0; j < lev; ++j) boxes.push_back(log_box({lev, j}));
    }
    double mx = *std::max_element(boxes.begin(), boxes.end());
    double s = 0.0;
    for (double v : boxes) s += std::exp(v - mx);
    logT[lev] = mx + std::log(s);
  }

  double acc = 0.0;
  for (int k = L - 1 - W; k < L - 1; ++k) acc += logT[k + 1] - logT[k];
  double ratio = std::exp(acc / W);
  if (ratio <= 0.985) return true;
  if (ratio >= 0.999) return false;
  std::ostringstream os;
  os << "integrability probe unresolved: tail ratio " << ratio
     << " too close to 1 (parameters near a membership threshold)";
  throw std::runtime_error(os.str());
}

bool zero_lelong_absorption(const ModelWeight& w1, const ModelWeight& w2) {
  if (w1.dim() != w2.dim())
    throw std::invalid_argument("absorption check: weights live in different dimensions");
  if (w2.has_poles())
    throw std::invalid_argument(
        "absorption check: the perturbation must carry no logarithmic singularities "
        "(zero Lelong numbers)");

  ModelWeight merged(w1.dim());
  auto append = [&merged](const ModelWeight& src) {
    for (const auto& lt : src.log_terms()) merged.add_log(lt.c, lt.p);
    for (const auto& pt : src.log_pair_terms())
      merged.add_log_pair(pt.c, pt.b1, pt.p1, pt.b2, pt.p2);
    for (const auto& st : src.smooth_terms()) {
      if (st.kind == weights::SmoothTerm::kRealPart)
        merged.add_real_part(st.c, st.p);
      else
        merged.add_trig(st.c, st.kind == weights::SmoothTerm::kSin, st.imag_argument, st.p);
    }
  };
  append(w1);
  append(w2);

  StaircaseIdeal base = ideal_of_weight(w1);
  if (base != ideal_of_weight(merged)) return false;

  int n = w1.dim();
  Point at = base.shift.empty() ? origin(n) : base.shift;
  std::vector<std::vector<int>> sweep;
  if (n == 1) {
    for (int p = 0; p <= 6; ++p) sweep.push_back({p});
  } else {
    for (int p = 0; p <= 6; ++p)
      for (int q = 0; p + q <= 6; ++q) sweep.push_back({p, q});
  }

  // Probe both weights over the sweep in parallel; assemble results in order.
  std::vector<std::future<std::pair<bool, bool>>> futs;
  futs.reserve(sweep.size());
  for (const auto& e : sweep)
    futs.push_back(std::async(std::launch::async, [&w1, &merged, &at, e] {
      return std::make_pair(monomial_integrability_probe(w1, Rational(1), e, at),
                            monomial_integrability_probe(merged, Rational(1), e, at));
    }));
  bool agree = true;
  for (auto& fu : futs) {
    auto [m1, m2] = fu.get();
    agree = agree && m1 == m2;
  }
  return agree;
}

bool e1_isolated_check(const ModelWeight& w, const PolydiscDomain& dom) {
  if (w.dim() != dom.dim())
    throw std::invalid_argument("singular-set check: weight and domain dimension mismatch");
  int n = w.dim();
  if (n == 1) return true;  // one-variable level sets are discrete
  if (n > 2)
    throw std::invalid_argument(
        "singular-set check: weights in three or more variables are not supported");

  // Generic vanishing order of a factor along the line {z_j = v}: positive only
  // when the factor is univariate in z_j and vanishes at v.
  auto ord_on_line = [&](const Poly& p, int j, Cplx v) -> int {
    if (p.only_variable() != j) return 0;
    Point x(n, Cplx{});
    x[j - 1] = v;
    return p.vanishing_order(x);
  };

  auto lines = w.coordinate_singular_values();
  for (int j = 1; j <= n; ++j) {
    for (Cplx v : lines[j - 1]) {
      if (std::abs(v - dom.center[j - 1]) >= dom.radii[j - 1]) continue;
      Rational nu(0);
      for (const auto& lt : w.log_terms()) nu += lt.c * Rational(ord_on_line(lt.p, j, v));
      for (const auto& pt : w.log_pair_terms()) {
        Rational o1 = pt.b1 * Rational(ord_on_line(pt.p1, j, v));
        Rational o2 = pt.b2 * Rational(ord_on_line(pt.p2, j, v));
        nu += pt.c * (o1 < o2 ? o1 : o2);
      }
      if (!(nu < 1)) return false;  // a full line of Lelong number ≥ 1
    }
  }
  return true;
}

}  // namespace lefschetz::mis
