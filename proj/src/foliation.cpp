#include "lefschetz/foliation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lefschetz::foliation {

namespace {

constexpr double kTransitionTol = 1e-9;
constexpr double kRankThreshold = 1e-10;
constexpr double kWitnessTol = 1e-9;
// Recorded convention: the flat abelian surface has unit Riemannian volume,
// so the fiber integral of its squared Kähler form is 2 (dV = ω²/2).
constexpr double kCellOmegaSq = 2.0;

RatFunc minus_w_squared() {
  return RatFunc::from_poly(PolyW::from_coeffs({GaussRat(0), GaussRat(0), GaussRat(-1)}));
}

std::vector<ChartPoint> overlap_grid() {
  std::vector<ChartPoint> pts;
  for (double r : {0.6, 1.0, 1.7})
    for (int j = 0; j < 8; ++j) {
      double th = 2.0 * std::numbers::pi * (j + 0.37) / 8.0;
      pts.push_back({0, std::polar(r, th)});
    }
  return pts;
}

// Deterministic sample set: the chart-0 origin, rings in both charts, then
// seeded annulus draws until `total` points are available.
std::vector<ChartPoint> sample_points(int total) {
  std::vector<ChartPoint> pts;
  pts.push_back({0, Cplx(0.0, 0.0)});
  for (int j = 0; j < 8; ++j)
    pts.push_back({0, std::polar(1.3, 2.0 * std::numbers::pi * j / 8.0)});
  for (int j = 0; j < 4; ++j)
    pts.push_back({1, std::polar(0.8, 2.0 * std::numbers::pi * (j + 0.5) / 4.0)});
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> rad(0.3, 1.9), ang(0.0, 2.0 * std::numbers::pi);
  while (static_cast<int>(pts.size()) < total) {
    int chart = static_cast<int>(pts.size()) % 2;
    pts.push_back({chart, std::polar(rad(rng), ang(rng))});
  }
  return pts;
}

using Triple = std::array<RatFunc, 3>;

// Kernel of ξ ↦ ι_ξ v as symbolic frame triples, valid where the rank is
// generic (the constant-rank locus sampled by the callers).
std::vector<Triple> symbolic_kernel(const SectionNQ& v, int chart) {
  const auto& cs = v.coeffs(chart);
  const RatFunc &a = cs[0], &b = cs[1], &c = cs[2];
  std::vector<Triple> basis;
  if (a.is_zero() && b.is_zero() && c.is_zero()) {
    basis.push_back({RatFunc(1), RatFunc(0), RatFunc(0)});
    basis.push_back({RatFunc(0), RatFunc(1), RatFunc(0)});
    basis.push_back({RatFunc(0), RatFunc(0), RatFunc(1)});
    return basis;
  }
  if (v.form_degree == 1) {
    if (!c.is_zero()) {
      basis.push_back({c, RatFunc(0), -a});
      basis.push_back({RatFunc(0), c, -b});
    } else if (!b.is_zero()) {
      basis.push_back({b, -a, RatFunc(0)});
      basis.push_back({RatFunc(0), RatFunc(0), RatFunc(1)});
    } else {
      basis.push_back({RatFunc(0), RatFunc(1), RatFunc(0)});
      basis.push_back({RatFunc(0), RatFunc(0), RatFunc(1)});
    }
  } else {
    // the 3×3 contraction matrix is antisymmetric: one-dimensional kernel
    basis.push_back({-c, b, -a});
  }
  return basis;
}

// ι_B v as symbolic coefficients on the target coframe basis.
std::vector<RatFunc> contract(const SectionNQ& v, int chart, const Triple& B) {
  const auto& cs = v.coeffs(chart);
  const RatFunc &a = cs[0], &b = cs[1], &c = cs[2];
  if (v.form_degree == 1) return {a * B[0] + b * B[1] + c * B[2]};
  return {-a * B[1] - b * B[2], a * B[0] - c * B[2], b * B[0] + c * B[1]};
}

Triple bracket_in_chart(const Triple& x, const Triple& y) {
  Triple out;
  for (int i = 0; i < 3; ++i)
    out[i] = x[2] * y[i].derivative() - y[2] * x[i].derivative();
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Gaussian-rational scalars and polynomials

GaussRat GaussRat::inverse() const {
  if (is_zero()) throw std::invalid_argument("division by zero Gaussian rational");
  Rational n = re * re + im * im;
  return {re / n, -im / n};
}

PolyW PolyW::from_coeffs(std::vector<GaussRat> cs) {
  PolyW p;
  p.c = std::move(cs);
  p.trim();
  return p;
}

void PolyW::trim() {
  while (!c.empty() && c.back().is_zero()) c.pop_back();
}

GaussRat PolyW::leading() const {
  if (c.empty()) throw std::invalid_argument("leading coefficient of the zero polynomial");
  return c.back();
}

PolyW PolyW::operator+(const PolyW& o) const {
  std::vector<GaussRat> out(std::max(c.size(), o.c.size()));
  for (size_t k = 0; k < out.size(); ++k) {
    if (k < c.size()) out[k] = out[k] + c[k];
    if (k < o.c.size()) out[k] = out[k] + o.c[k];
  }
  return from_coeffs(std::move(out));
}

PolyW PolyW::operator-() const {
  PolyW p = *this;
  for (auto& v : p.c) v = -v;
  return p;
}

PolyW PolyW::operator-(const PolyW& o) const { return *this + (-o); }

PolyW PolyW::operator*(const PolyW& o) const {
  if (is_zero() || o.is_zero()) return {};
  std::vector<GaussRat> out(c.size() + o.c.size() - 1);
  for (size_t j = 0; j < c.size(); ++j)
    for (size_t k = 0; k < o.c.size(); ++k) out[j + k] = out[j + k] + c[j] * o.c[k];
  return from_coeffs(std::move(out));
}

PolyW PolyW::derivative() const {
  if (c.size() <= 1) return {};
  std::vector<GaussRat> out(c.size() - 1);
  for (size_t k = 1; k < c.size(); ++k) out[k - 1] = c[k] * GaussRat(static_cast<long>(k));
  return from_coeffs(std::move(out));
}

PolyW PolyW::reversed() const {
  std::vector<GaussRat> out(c.rbegin(), c.rend());
  return from_coeffs(std::move(out));
}

PolyW PolyW::times_power(int k) const {
  if (is_zero()) return {};
  PolyW p = *this;
  p.c.insert(p.c.begin(), static_cast<size_t>(k), GaussRat());
  return p;
}

Cplx PolyW::eval(Cplx w) const {
  Cplx acc(0.0, 0.0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * w + it->value();
  return acc;
}

std::string PolyW::to_string() const {
  if (c.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (int k = degree(); k >= 0; --k) {
    const GaussRat& a = c[k];
    if (a.is_zero()) continue;
    if (!first) os << " + ";
    first = false;
    os << '(' << rational_to_string(a.re);
    if (a.im != 0) os << (a.im > 0 ? "+" : "-") << rational_to_string(abs(a.im)) << "i";
    os << ')';
    if (k > 0) os << "w";
    if (k > 1) os << '^' << k;
  }
  return os.str();
}

std::pair<PolyW, PolyW> poly_divmod(const PolyW& a, const PolyW& b) {
  if (b.is_zero()) throw std::invalid_argument("polynomial division by zero");
  PolyW r = a;
  std::vector<GaussRat> q(a.degree() >= b.degree() ? a.degree() - b.degree() + 1 : 0);
  GaussRat inv = b.leading().inverse();
  while (!r.is_zero() && r.degree() >= b.degree()) {
    int k = r.degree() - b.degree();
    GaussRat f = r.leading() * inv;
    q[k] = f;
    r = r - (b * PolyW(f)).times_power(k);
  }
  return {PolyW::from_coeffs(std::move(q)), r};
}

PolyW poly_gcd(PolyW a, PolyW b) {
  while (!b.is_zero()) {
    PolyW r = poly_divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  return a * PolyW(a.leading().inverse());
}

// ---------------------------------------------------------------------------
// Polynomial parser: sums of terms, term = factor ('*'? factor)*, factors are
// rationals, 'i', and 'w' with optional '^k'.

namespace {

struct PolyParser {
  const std::string& s;
  size_t pos = 0;

  explicit PolyParser(const std::string& text) : s(text) {}

  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool peek(char c) {
    skip();
    return pos < s.size() && s[pos] == c;
  }
  bool eat(char c) {
    if (!peek(c)) return false;
    ++pos;
    return true;
  }
  long integer() {
    skip();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) throw std::invalid_argument("expected a number in polynomial at '" + s.substr(start) + "'");
    return std::stol(s.substr(start, pos - start));
  }

  PolyW factor() {
    skip();
    if (pos >= s.size()) throw std::invalid_argument("dangling polynomial expression");
    char ch = s[pos];
    if (ch == 'w') {
      ++pos;
      int k = eat('^') ? static_cast<int>(integer()) : 1;
      if (k < 0) throw std::invalid_argument("negative exponent in polynomial");
      return PolyW(GaussRat(1)).times_power(k);
    }
    if (ch == 'i') {
      ++pos;
      return PolyW(GaussRat::unit_i());
    }
    long n = integer();
    Rational v(n);
    if (eat('/')) v /= Rational(integer());
    if (pos < s.size() && s[pos] == 'i') {
      ++pos;
      return PolyW(GaussRat(Rational(0), v));
    }
    return PolyW(GaussRat(v));
  }

  PolyW term() {
    PolyW acc = factor();
    while (true) {
      skip();
      if (eat('*')) {
        acc = acc * factor();
      } else if (pos < s.size() && (s[pos] == 'w' || s[pos] == 'i' || std::isdigit(static_cast<unsigned char>(s[pos])))) {
        acc = acc * factor();
      } else {
        return acc;
      }
    }
  }

  PolyW expr() {
    PolyW acc;
    bool neg = eat('-');
    if (!neg) eat('+');
    acc = term();
    if (neg) acc = -acc;
    while (true) {
      skip();
      if (eat('+')) {
        acc = acc + term();
      } else if (eat('-')) {
        acc = acc - term();
      } else {
        break;
      }
    }
    skip();
    if (pos != s.size())
      throw std::invalid_argument("trailing characters in polynomial: '" + s.substr(pos) + "'");
    return acc;
  }
};

}  // namespace

PolyW parse_poly_w(const std::string& text) { return PolyParser(text).expr(); }

// ---------------------------------------------------------------------------
// Rational functions

RatFunc::RatFunc(PolyW n, PolyW d) : num(std::move(n)), den(std::move(d)) {
  if (den.is_zero()) throw std::invalid_argument("rational function with zero denominator");
  if (num.is_zero()) {
    den = PolyW(GaussRat(1));
    return;
  }
  PolyW g = poly_gcd(num, den);
  if (g.degree() > 0) {
    num = poly_divmod(num, g).first;
    den = poly_divmod(den, g).first;
  }
  GaussRat inv = den.leading().inverse();
  num = num * PolyW(inv);
  den = den * PolyW(inv);
}

RatFunc RatFunc::operator+(const RatFunc& o) const {
  return {num * o.den + o.num * den, den * o.den};
}
RatFunc RatFunc::operator-(const RatFunc& o) const {
  return {num * o.den - o.num * den, den * o.den};
}
RatFunc RatFunc::operator*(const RatFunc& o) const { return {num * o.num, den * o.den}; }
RatFunc RatFunc::operator/(const RatFunc& o) const {
  if (o.is_zero()) throw std::invalid_argument("division by the zero rational function");
  return {num * o.den, den * o.num};
}
RatFunc RatFunc::operator-() const { return {-num, den}; }

bool RatFunc::operator==(const RatFunc& o) const {
  return (num * o.den - o.num * den).is_zero();
}

RatFunc RatFunc::derivative() const {
  return {num.derivative() * den - num * den.derivative(), den * den};
}

RatFunc RatFunc::reciprocal_substitution() const {
  if (num.is_zero()) return RatFunc(0);
  int k = den.degree() - num.degree();
  if (k >= 0) return {num.reversed().times_power(k), den.reversed()};
  return {num.reversed(), den.reversed().times_power(-k)};
}

Cplx RatFunc::eval(Cplx w) const {
  Cplx d = den.eval(w);
  if (std::abs(d) < 1e-12) throw std::runtime_error("pole at evaluation");
  return num.eval(w) / d;
}

std::string RatFunc::to_string() const {
  if (is_polynomial()) return num.to_string();
  return "(" + num.to_string() + ") / (" + den.to_string() + ")";
}

// ---------------------------------------------------------------------------
// Frame fields

FrameField FrameField::from_chart0(RatFunc a, RatFunc b, RatFunc c) {
  FrameField f;
  f.chart1 = {a.reciprocal_substitution(), b.reciprocal_substitution(),
              minus_w_squared() * c.reciprocal_substitution()};
  f.chart0 = {std::move(a), std::move(b), std::move(c)};
  return f;
}

FrameField FrameField::from_charts(std::array<RatFunc, 3> c0, std::array<RatFunc, 3> c1) {
  FrameField f;
  f.chart0 = std::move(c0);
  f.chart1 = std::move(c1);
  f.validate();
  return f;
}

bool FrameField::is_zero() const {
  return chart0[0].is_zero() && chart0[1].is_zero() && chart0[2].is_zero();
}

std::array<Cplx, 3> FrameField::eval(const ChartPoint& x) const {
  const auto& cs = coeffs(x.chart);
  return {cs[0].eval(x.w), cs[1].eval(x.w), cs[2].eval(x.w)};
}

double FrameField::transition_defect() const {
  double worst = 0.0;
  for (const ChartPoint& p : overlap_grid()) {
    Cplx hw = 1.0 / p.w;
    try {
      auto v0 = eval(p);
      auto v1 = eval({1, hw});
      // vector transition: U, V components carry over, W picks up −ŵ²
      Cplx expected[3] = {v0[0], v0[1], -hw * hw * v0[2]};
      for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(v1[i] - expected[i]));
    } catch (const std::runtime_error&) {
      // pole on the grid: skip the point
    }
  }
  return worst;
}

void FrameField::validate() const {
  double d = transition_defect();
  if (d > kTransitionTol)
    throw std::invalid_argument("frame field charts disagree on the overlap (defect " +
                                std::to_string(d) + ")");
}

FrameField lie_bracket(const FrameField& x, const FrameField& y) {
  Triple out0 = bracket_in_chart(x.chart0, y.chart0);
  Triple out1 = bracket_in_chart(x.chart1, y.chart1);
  // the in-chart brackets of consistent fields glue back to a global field
  return FrameField::from_charts(std::move(out0), std::move(out1));
}

// ---------------------------------------------------------------------------
// Sections and interior products

SectionNQ SectionNQ::zero(int degree) {
  if (degree != 1 && degree != 2)
    throw std::invalid_argument("sections carry form degree 1 or 2");
  SectionNQ s;
  s.form_degree = degree;
  s.canonical_twist = (degree == 1);
  s.chart0 = s.chart1 = {RatFunc(0), RatFunc(0), RatFunc(0)};
  return s;
}

SectionNQ SectionNQ::parallel_preimage() {
  SectionNQ s;
  s.form_degree = 2;
  s.canonical_twist = false;
  s.chart0 = s.chart1 = {RatFunc(1), RatFunc(0), RatFunc(0)};
  return s;
}

SectionNQ SectionNQ::scaled(const GaussRat& f) const {
  SectionNQ s = *this;
  RatFunc m = RatFunc::from_poly(PolyW(f));
  for (int i = 0; i < 3; ++i) {
    s.chart0[i] = s.chart0[i] * m;
    s.chart1[i] = s.chart1[i] * m;
  }
  return s;
}

SectionNQ build_eta(const FrameField& s, const FrameField& t) {
  if (!s.is_vertical() || !t.is_vertical())
    throw std::invalid_argument("eta construction requires vertical fields (multiples of W)");
  SectionNQ out;
  out.form_degree = 1;
  out.canonical_twist = true;
  // (f/(1+f²+g²))U* + (g/(1+f²+g²))V* − (1/(1+f²+g²))W* tensored with
  // fU+gV−W; absorbing fU+gV−W = −(1+f²+g²)·(U∧V∧W) clears the denominators
  // and leaves polynomial coefficients (−f, −g, 1) on the canonical frame.
  for (int chart = 0; chart < 2; ++chart) {
    const RatFunc& f = s.coeffs(chart)[2];
    const RatFunc& g = t.coeffs(chart)[2];
    auto& cs = chart ? out.chart1 : out.chart0;
    cs = {-f, -g, RatFunc(1)};
  }
  return out;
}

Eigen::MatrixXcd interior_matrix(const SectionNQ& v, const ChartPoint& x) {
  const auto& cs = v.coeffs(x.chart);
  Cplx a = cs[0].eval(x.w), b = cs[1].eval(x.w), c = cs[2].eval(x.w);
  if (v.form_degree == 1) {
    Eigen::MatrixXcd m(1, 3);
    m << a, b, c;
    return m;
  }
  Eigen::MatrixXcd m(3, 3);
  m << Cplx(0, 0), -a, -b, a, Cplx(0, 0), -c, b, c, Cplx(0, 0);
  return m;
}

DistributionSample kernel_sample(const SectionNQ& v, const ChartPoint& x) {
  Eigen::MatrixXcd m = interior_matrix(v, x);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
  lu.setThreshold(kRankThreshold);
  DistributionSample out;
  out.at = x;
  out.rank = static_cast<int>(lu.rank());
  Eigen::MatrixXcd ker = lu.kernel();
  double scale = std::max(1.0, m.norm());
  for (int j = 0; j < ker.cols(); ++j) {
    Eigen::Vector3cd b = ker.col(j).normalized();
    if ((m * b).norm() > 1e-8 * scale)
      throw std::logic_error("kernel basis fails to annihilate the interior matrix");
    out.basis.push_back(b);
  }
  if (out.rank == 3) out.basis.clear();  // Eigen returns a zero column for trivial kernels
  return out;
}

int generic_rank(const SectionNQ& v) {
  std::mt19937 rng(7001);
  std::uniform_real_distribution<double> rad(0.2, 2.0), ang(0.0, 2.0 * std::numbers::pi);
  std::vector<ChartPoint> pts;
  for (int k = 0; k < 50; ++k) pts.push_back({k % 2, std::polar(rad(rng), ang(rng))});
  std::vector<std::future<int>> jobs;
  jobs.reserve(pts.size());
  for (const ChartPoint& p : pts)
    jobs.push_back(std::async(std::launch::async, [&v, p]() -> int {
      try {
        Eigen::MatrixXcd m = interior_matrix(v, p);
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
        lu.setThreshold(kRankThreshold);
        return static_cast<int>(lu.rank());
      } catch (const std::runtime_error&) {
        return -1;  // pole: the point carries no rank information
      }
    }));
  int best = 0;
  for (auto& j : jobs) best = std::max(best, j.get());
  return best;
}

IntegrabilityReport integrability_test(const SectionNQ& v, int samples) {
  std::vector<ChartPoint> pts = sample_points(std::max(samples, 13));

  int lo = 4, hi = -1;
  for (const ChartPoint& p : pts) {
    try {
      Eigen::MatrixXcd m = interior_matrix(v, p);
      Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
      lu.setThreshold(kRankThreshold);
      int r = static_cast<int>(lu.rank());
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    } catch (const std::runtime_error&) {
      // pole at the sample: no rank reading
    }
  }
  if (hi < 0) throw std::runtime_error("no pole-free sample points");
  if (lo != hi) throw std::runtime_error("not generic; enlarge sample");

  IntegrabilityReport rep;
  for (int chart = 0; chart < 2 && rep.integrable; ++chart) {
    std::vector<Triple> basis = symbolic_kernel(v, chart);
    for (size_t i = 0; i < basis.size() && rep.integrable; ++i)
      for (size_t j = i + 1; j < basis.size() && rep.integrable; ++j) {
        Triple br = bracket_in_chart(basis[i], basis[j]);
        std::vector<RatFunc> res = contract(v, chart, br);
        bool zero = true;
        for (const RatFunc& r : res) zero = zero && r.is_zero();
        if (zero) continue;
        rep.integrable = false;
        // witness: the sample of this chart with the largest residual
        double best = 0.0;
        for (const ChartPoint& p : pts) {
          if (p.chart != chart) continue;
          try {
            std::vector<Cplx> vals;
            double mag = 0.0;
            for (const RatFunc& r : res) {
              Cplx z = r.eval(p.w);
              vals.push_back(z);
              mag += std::norm(z);
            }
            mag = std::sqrt(mag);
            if (mag > best && mag > kWitnessTol) {
              best = mag;
              rep.has_witness = true;
              rep.witness = p;
              rep.residual = std::move(vals);
            }
          } catch (const std::runtime_error&) {
          }
        }
      }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// The fiber-integral functional and the harmonic generator

std::array<RatFunc, 3> anti_form(const SectionNQ& v) {
  if (v.form_degree != 1 || !v.canonical_twist)
    throw std::invalid_argument("fiber-integral form requires a twisted 1-form section");
  // ω²∧v contracted against the canonical frame, written on the fixed basis
  // (V̄*∧W̄*, Ū*∧W̄*, Ū*∧V̄*); for η = (−f, −g, 1) this is (f, g, 1).
  return {-v.chart0[0], -v.chart0[1], v.chart0[2]};
}

Cplx iota_invariant(const SectionNQ& v) {
  std::array<RatFunc, 3> af = anti_form(v);
  // only the Ū*∧V̄* component survives integration over a fiber A × {x}
  Cplx vertical_coeff = af[2].eval(Cplx(0.5, 0.0));
  return vertical_coeff * kCellOmegaSq;
}

HarmonicReport harmonic_generator_check() {
  HarmonicReport rep;

  // The generator Ū*∧V̄* has constant frame coefficients, and the A-factor
  // coframe is parallel: the ∂̄ residual is the exact derivative of constants.
  PolyW one(GaussRat(1));
  rep.dbar_residual = std::abs(one.derivative().eval(Cplx(0.3, 0.4)));

  // ∂̄* = −⋆∂⋆ leaves only terms carrying the derivative of the fiber-metric
  // conformal factor at the chart center.  Recentring by the isometry
  // μ_c(ζ) = (c+ζ)/(1−c̄ζ) keeps the factor λ(ζ)|μ'|-pulled equal to
  // λ(ζ) = 1/(1+|ζ|²), whose derivative at 0 vanishes; the numeric residual
  // reports that derivative at ten centers.
  auto lambda = [](Cplx z) { return 1.0 / (1.0 + std::norm(z)); };
  std::mt19937 rng(991);
  std::uniform_real_distribution<double> rad(0.0, 1.4), ang(0.0, 2.0 * std::numbers::pi);
  double worst = 0.0;
  const double h = 1e-4;
  for (int k = 0; k < 10; ++k) {
    Cplx c = std::polar(rad(rng), ang(rng));
    auto pulled = [&](Cplx z) {
      Cplx mu = (c + z) / (1.0 - std::conj(c) * z);
      Cplx dmu = (1.0 + std::norm(c)) / std::pow(1.0 - std::conj(c) * z, 2);
      return lambda(mu) * std::abs(dmu);
    };
    double dre = (pulled(Cplx(h, 0)) - pulled(Cplx(-h, 0))) / (2 * h);
    double dim = (pulled(Cplx(0, h)) - pulled(Cplx(0, -h))) / (2 * h);
    worst = std::max(worst, std::abs(dre) + std::abs(dim));
  }
  rep.dbar_star_residual = worst;

  std::array<RatFunc, 3> af = anti_form(build_eta(FrameField::zero(), FrameField::zero()));
  rep.preimage_matches = af[0].is_zero() && af[1].is_zero() && af[2] == RatFunc(1);
  return rep;
}

}  // namespace lefschetz::foliation
