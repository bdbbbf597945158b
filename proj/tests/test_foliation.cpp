#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "lefschetz/foliation.hpp"

using namespace lefschetz;
namespace F = lefschetz::foliation;
using F::ChartPoint;
using F::Cplx;
using F::FrameField;
using F::GaussRat;
using F::PolyW;
using F::RatFunc;
using F::SectionNQ;

namespace {

RatFunc rf(const std::string& s) { return RatFunc::from_poly(F::parse_poly_w(s)); }

// ---------------------------------------------------------------------------
// Oracle 1: pushforward of homogeneous vector fields on the projective line.
// A field P(w₁,w₂)∂_{w₁} + Q(w₁,w₂)∂_{w₂} acts on the affine coordinate
// w = w₁/w₂ by ẇ = P/w₂ − w·Q/w₂, so on the slice w₂ = 1 the chart
// coefficient is P(w,1) − w·Q(w,1); symmetrically the second chart uses
// ŵ = w₂/w₁ and the slice w₁ = 1.
using Homog = std::function<Cplx(Cplx, Cplx)>;

Cplx push_chart0(const Homog& P, const Homog& Q, Cplx w) {
  return P(w, 1.0) - w * Q(w, 1.0);
}
Cplx push_chart1(const Homog& P, const Homog& Q, Cplx hw) {
  return Q(1.0, hw) - hw * P(1.0, hw);
}

// Oracle 2: Lie bracket by numerical differentiation.  In a fixed chart the
// frame satisfies [U,V]=[U,W]=[V,W]=0 and only W = ∂_w differentiates the
// coefficients, so [X,Y]_i = X_W·∂_w(Y_i) − Y_W·∂_w(X_i).
std::array<Cplx, 3> bracket_fd(const FrameField& x, const FrameField& y, const ChartPoint& p) {
  const double h = 1e-5;
  auto d = [&](const RatFunc& f) {
    return (f.eval(p.w + h) - f.eval(p.w - h)) / (2.0 * h);
  };
  const auto& xc = x.coeffs(p.chart);
  const auto& yc = y.coeffs(p.chart);
  Cplx xw = xc[2].eval(p.w), yw = yc[2].eval(p.w);
  std::array<Cplx, 3> out;
  for (int i = 0; i < 3; ++i) out[i] = xw * d(yc[i]) - yw * d(xc[i]);
  return out;
}

// Oracle 3: the recentring maps used for the normal-chart computation are
// isometries of the fiber metric: λ(μ_c(ζ))·|μ_c'(ζ)| = λ(ζ).
double isometry_defect(Cplx c, Cplx z) {
  auto lam = [](Cplx v) { return 1.0 / (1.0 + std::norm(v)); };
  Cplx mu = (c + z) / (1.0 - std::conj(c) * z);
  Cplx dmu = (1.0 + std::norm(c)) / std::pow(1.0 - std::conj(c) * z, 2);
  return std::abs(lam(mu) * std::abs(dmu) - lam(z));
}

double span_gap(const std::vector<Eigen::Vector3cd>& a, const std::vector<Eigen::Vector3cd>& b) {
  Eigen::MatrixXcd m(3, a.size() + b.size());
  for (size_t j = 0; j < a.size(); ++j) m.col(static_cast<int>(j)) = a[j].normalized();
  for (size_t j = 0; j < b.size(); ++j)
    m.col(static_cast<int>(a.size() + j)) = b[j].normalized();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  auto sv = svd.singularValues();
  // the stacked spans coincide exactly when no extra direction appears
  return a.size() < sv.size() ? sv(static_cast<int>(a.size())) : 0.0;
}

std::mt19937 g_rng(20260826);

Cplx random_annulus_point() {
  std::uniform_real_distribution<double> rad(0.4, 1.8), ang(0.0, 2.0 * std::numbers::pi);
  return std::polar(rad(g_rng), ang(g_rng));
}

PolyW random_poly(int maxdeg) {
  std::uniform_int_distribution<int> deg(0, maxdeg), num(-4, 4);
  std::vector<GaussRat> cs(deg(g_rng) + 1);
  for (auto& c : cs) c = GaussRat(Rational(num(g_rng)), Rational(num(g_rng), 2));
  return PolyW::from_coeffs(std::move(cs));
}

}  // namespace

TEST_CASE("gaussian rational arithmetic") {
  GaussRat i = GaussRat::unit_i();
  CHECK(i * i == GaussRat(-1));
  GaussRat z(Rational(3, 2), Rational(-1, 3));
  CHECK(z * z.inverse() == GaussRat(1));
  CHECK(z + (-z) == GaussRat(0));
  CHECK(z.conj().im == Rational(1, 3));
  CHECK((GaussRat(2) / i) == GaussRat(Rational(0), Rational(-2)));
  CHECK_THROWS_AS(GaussRat(0).inverse(), std::invalid_argument);
}

TEST_CASE("polynomial algebra and parsing") {
  PolyW p = F::parse_poly_w("-w^2");
  CHECK(p.degree() == 2);
  CHECK(p.coeff(2) == GaussRat(-1));
  CHECK(p.coeff(0) == GaussRat(0));

  PolyW q = F::parse_poly_w("3/2*w - 1 + i*w^3");
  CHECK(q.degree() == 3);
  CHECK(q.coeff(1) == GaussRat(Rational(3, 2)));
  CHECK(q.coeff(3) == GaussRat::unit_i());
  Cplx at = q.eval(Cplx(2.0, 0.0));
  CHECK(std::abs(at - Cplx(2.0, 8.0)) < 1e-14);

  CHECK(F::parse_poly_w("i*i") == PolyW(GaussRat(-1)));
  CHECK(F::parse_poly_w("2w") == F::parse_poly_w("2*w"));
  CHECK(F::parse_poly_w("0").is_zero());
  CHECK_THROWS_AS(F::parse_poly_w("w^2 +"), std::invalid_argument);
  CHECK_THROWS_AS(F::parse_poly_w("x"), std::invalid_argument);

  auto [quo, rem] = F::poly_divmod(F::parse_poly_w("w^3 - 1"), F::parse_poly_w("w - 1"));
  CHECK(quo == F::parse_poly_w("w^2 + w + 1"));
  CHECK(rem.is_zero());
  CHECK(F::poly_gcd(F::parse_poly_w("w^2 - 1"), F::parse_poly_w("w^2 - 2*w + 1")) ==
        F::parse_poly_w("w - 1"));
  CHECK(F::parse_poly_w("w^2 - 3").derivative() == F::parse_poly_w("2*w"));
  CHECK(F::parse_poly_w("2*w^2 + w").reversed() == F::parse_poly_w("2 + w"));
}

TEST_CASE("rational functions reduce exactly") {
  RatFunc r(F::parse_poly_w("w^2 - 1"), F::parse_poly_w("w - 1"));
  CHECK(r == rf("w + 1"));
  CHECK(r.is_polynomial());

  RatFunc s(F::parse_poly_w("1"), F::parse_poly_w("w"));
  CHECK((s + s) == RatFunc(F::parse_poly_w("2"), F::parse_poly_w("w")));
  CHECK((s * rf("w")) == rf("1"));
  CHECK((rf("w") / s) == rf("w^2"));
  CHECK_THROWS_AS(rf("1") / RatFunc(0), std::invalid_argument);
  CHECK_THROWS_AS(RatFunc(F::parse_poly_w("1"), PolyW{}), std::invalid_argument);

  // derivative against finite differences
  RatFunc g = RatFunc(F::parse_poly_w("w^3 + 2*w"), F::parse_poly_w("w^2 + 1"));
  RatFunc dg = g.derivative();
  for (Cplx w : {Cplx(0.3, 0.1), Cplx(-0.7, 0.5), Cplx(1.2, -0.4)}) {
    Cplx fd = (g.eval(w + 1e-5) - g.eval(w - 1e-5)) / Cplx(2e-5, 0.0);
    CHECK(std::abs(dg.eval(w) - fd) < 1e-7);
  }

  // substitution w ↦ 1/w is an involution
  CHECK(g.reciprocal_substitution().reciprocal_substitution() == g);
  CHECK(s.reciprocal_substitution() == rf("w"));

  CHECK_THROWS_WITH_AS(s.eval(Cplx(0.0, 0.0)), "pole at evaluation", std::runtime_error);
}

TEST_CASE("frame fields and chart transitions") {
  // the standard homogeneous pair: S = w₂∂_{w₁}, T = w₁∂_{w₂}
  Homog P1 = [](Cplx, Cplx w2) { return w2; };
  Homog Q1 = [](Cplx, Cplx) { return Cplx(0.0, 0.0); };
  Homog P2 = [](Cplx, Cplx) { return Cplx(0.0, 0.0); };
  Homog Q2 = [](Cplx w1, Cplx) { return w1; };

  FrameField S = FrameField::vertical(rf("1"));
  FrameField T = FrameField::vertical(rf("-w^2"));
  CHECK(S.is_vertical());
  CHECK(S.chart1[2] == rf("-w^2"));  // ĉ(ŵ) = −ŵ²·c(1/ŵ)
  CHECK(T.chart1[2] == rf("1"));

  for (int k = 0; k < 12; ++k) {
    Cplx w = random_annulus_point();
    CHECK(std::abs(S.coeffs(0)[2].eval(w) - push_chart0(P1, Q1, w)) < 1e-12);
    CHECK(std::abs(T.coeffs(0)[2].eval(w) - push_chart0(P2, Q2, w)) < 1e-12);
    CHECK(std::abs(S.coeffs(1)[2].eval(w) - push_chart1(P1, Q1, w)) < 1e-12);
    CHECK(std::abs(T.coeffs(1)[2].eval(w) - push_chart1(P2, Q2, w)) < 1e-12);
  }

  CHECK(S.transition_defect() < 1e-12);
  FrameField mixed = FrameField::from_chart0(rf("w"), rf("2"), rf("w^2 - 1"));
  CHECK(mixed.transition_defect() < 1e-12);
  CHECK_NOTHROW(mixed.validate());

  // deliberately wrong second chart
  auto broken = mixed.chart1;
  broken[0] = broken[0] + rf("1");
  CHECK_THROWS_AS(FrameField::from_charts(mixed.chart0, broken), std::invalid_argument);
}

TEST_CASE("lie brackets") {
  FrameField U = FrameField::from_chart0(rf("1"), rf("0"), rf("0"));
  FrameField V = FrameField::from_chart0(rf("0"), rf("1"), rf("0"));
  FrameField S = FrameField::vertical(rf("1"));
  FrameField T = FrameField::vertical(rf("-w^2"));

  CHECK(F::lie_bracket(U, V).is_zero());
  CHECK(F::lie_bracket(S, S).is_zero());

  // [U+S, V+T] = [S,T] = (f g' − g f')·W = −2w·W
  FrameField US = FrameField::from_chart0(rf("1"), rf("0"), rf("1"));
  FrameField VT = FrameField::from_chart0(rf("0"), rf("1"), rf("-w^2"));
  FrameField br = F::lie_bracket(US, VT);
  CHECK(br.chart0[0].is_zero());
  CHECK(br.chart0[1].is_zero());
  CHECK(br.chart0[2] == rf("-2*w"));
  CHECK(br.chart1[2] == rf("2*w"));
  CHECK(F::lie_bracket(S, T).chart0[2] == rf("-2*w"));

  // numerical-differentiation oracle on generic fields, both charts
  FrameField X = FrameField::from_chart0(rf("w"), rf("1"), rf("w^2 - 1"));
  FrameField Y = FrameField::from_chart0(rf("2"), rf("w"), rf("3*w"));
  FrameField B = F::lie_bracket(X, Y);
  for (int k = 0; k < 10; ++k) {
    ChartPoint p{k % 2, random_annulus_point()};
    auto expect = bracket_fd(X, Y, p);
    auto got = B.eval(p);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(got[i] - expect[i]) < 1e-7);
  }

  // antisymmetry
  FrameField BR = F::lie_bracket(Y, X);
  for (int i = 0; i < 3; ++i) CHECK((B.chart0[i] + BR.chart0[i]).is_zero());
}

TEST_CASE("eta construction") {
  SectionNQ flat = F::build_eta(FrameField::zero(), FrameField::zero());
  CHECK(flat.form_degree == 1);
  CHECK(flat.canonical_twist);
  for (int chart = 0; chart < 2; ++chart) {
    CHECK(flat.coeffs(chart)[0].is_zero());
    CHECK(flat.coeffs(chart)[1].is_zero());
    CHECK(flat.coeffs(chart)[2] == rf("1"));
  }

  FrameField S = FrameField::vertical(rf("1"));
  FrameField T = FrameField::vertical(rf("-w^2"));
  SectionNQ eta = F::build_eta(S, T);
  CHECK(eta.chart0[0] == rf("-1"));
  CHECK(eta.chart0[1] == rf("w^2"));
  CHECK(eta.chart0[2] == rf("1"));
  CHECK(eta.chart1[0] == rf("w^2"));
  CHECK(eta.chart1[1] == rf("-1"));

  FrameField horizontal = FrameField::from_chart0(rf("1"), rf("0"), rf("0"));
  CHECK_THROWS_WITH_AS(F::build_eta(horizontal, T), doctest::Contains("vertical"),
                       std::invalid_argument);

  // the defining orthogonality: η(U+S) = η(V+T) = 0, symbolically …
  std::uniform_int_distribution<int> flip(0, 1);
  for (int trial = 0; trial < 12; ++trial) {
    RatFunc f = RatFunc::from_poly(random_poly(4));
    RatFunc g = RatFunc::from_poly(random_poly(4));
    SectionNQ e = F::build_eta(FrameField::vertical(f), FrameField::vertical(g));
    for (int chart = 0; chart < 2; ++chart) {
      const auto& c = e.coeffs(chart);
      RatFunc fc = chart ? FrameField::vertical(f).chart1[2] : f;
      RatFunc gc = chart ? FrameField::vertical(g).chart1[2] : g;
      CHECK((c[0] + c[2] * fc).is_zero());  // ι_{U+fW} η
      CHECK((c[1] + c[2] * gc).is_zero());  // ι_{V+gW} η
    }
  }

  // … and numerically at random chart points for the standard pair
  for (int k = 0; k < 20; ++k) {
    ChartPoint p{k % 2, random_annulus_point()};
    Eigen::MatrixXcd m = F::interior_matrix(eta, p);
    RatFunc fc = p.chart ? S.chart1[2] : S.chart0[2];
    RatFunc gc = p.chart ? T.chart1[2] : T.chart0[2];
    Eigen::Vector3cd us(1.0, 0.0, fc.eval(p.w));
    Eigen::Vector3cd vt(0.0, 1.0, gc.eval(p.w));
    CHECK((m * us).norm() < 1e-12);
    CHECK((m * vt).norm() < 1e-12);
  }
}

TEST_CASE("interior matrices and kernel samples") {
  SectionNQ flat = F::build_eta(FrameField::zero(), FrameField::zero());
  auto ks = F::kernel_sample(flat, {0, Cplx(0.7, 0.2)});
  CHECK(ks.rank == 1);
  REQUIRE(ks.basis.size() == 2);
  for (const auto& b : ks.basis) CHECK(std::abs(b(2)) < 1e-12);  // span(U, V)

  SectionNQ par = SectionNQ::parallel_preimage();
  auto kp = F::kernel_sample(par, {0, Cplx(-0.4, 0.9)});
  CHECK(kp.rank == 2);
  REQUIRE(kp.basis.size() == 1);
  CHECK(std::abs(kp.basis[0](0)) < 1e-12);
  CHECK(std::abs(kp.basis[0](1)) < 1e-12);  // span(W)

  auto kz = F::kernel_sample(SectionNQ::zero(2), {1, Cplx(0.3, 0.0)});
  CHECK(kz.rank == 0);
  CHECK(kz.basis.size() == 3);

  // twisted eta: kernel contains U+fW and V+gW
  SectionNQ eta = F::build_eta(FrameField::vertical(rf("1")), FrameField::vertical(rf("-w^2")));
  Cplx w(0.7, 0.0);
  auto ke = F::kernel_sample(eta, {0, w});
  CHECK(ke.rank == 1);
  REQUIRE(ke.basis.size() == 2);
  Eigen::MatrixXcd basis(3, 2);
  basis.col(0) = ke.basis[0];
  basis.col(1) = ke.basis[1];
  for (Eigen::Vector3cd t : {Eigen::Vector3cd(1.0, 0.0, 1.0), Eigen::Vector3cd(0.0, 1.0, -w * w)}) {
    Eigen::Vector3cd proj = basis * (basis.adjoint() * basis).ldlt().solve(basis.adjoint() * t);
    CHECK((t - proj).norm() < 1e-9);
  }
}

TEST_CASE("generic rank by sampling") {
  SectionNQ eta = F::build_eta(FrameField::vertical(rf("1")), FrameField::vertical(rf("-w^2")));
  CHECK(F::generic_rank(eta) == 1);
  CHECK(F::generic_rank(SectionNQ::parallel_preimage()) == 2);
  CHECK(F::generic_rank(SectionNQ::zero(1)) == 0);
  CHECK(F::generic_rank(SectionNQ::zero(2)) == 0);
}

TEST_CASE("integrability of kernel distributions") {
  FrameField S = FrameField::vertical(rf("1"));
  FrameField T = FrameField::vertical(rf("-w^2"));
  SectionNQ eta = F::build_eta(S, T);

  auto rep = F::integrability_test(eta, 32);
  CHECK_FALSE(rep.integrable);
  REQUIRE(rep.has_witness);
  CHECK(rep.witness.chart == 0);
  REQUIRE(rep.residual.size() == 1);
  // ι_{[U+S, V+T]} η = [S,T] paired with the W*-component: −2w
  CHECK(std::abs(rep.residual[0] - (-2.0 * rep.witness.w)) < 1e-9);
  CHECK(std::abs(rep.residual[0]) > 0.1);

  CHECK(F::integrability_test(F::build_eta(FrameField::zero(), FrameField::zero()), 32).integrable);
  CHECK(F::integrability_test(SectionNQ::parallel_preimage(), 32).integrable);
  CHECK(F::integrability_test(SectionNQ::zero(1), 16).integrable);
  CHECK(F::integrability_test(SectionNQ::zero(2), 16).integrable);

  // a coefficient vanishing at the sampled origin forces a rank jump
  SectionNQ jump = SectionNQ::parallel_preimage();
  jump.chart0[0] = rf("w");
  jump.chart1[0] = RatFunc(F::parse_poly_w("1"), F::parse_poly_w("w"));
  CHECK_THROWS_WITH_AS(F::integrability_test(jump, 32), "not generic; enlarge sample",
                       std::runtime_error);

  // integrable exactly when the two vertical fields commute
  int noncommuting = 0;
  for (int trial = 0; trial < 20; ++trial) {
    RatFunc f = RatFunc::from_poly(random_poly(2));
    RatFunc g;
    if (trial % 2 == 0) {
      g = RatFunc::from_poly(random_poly(2));
    } else {
      g = f * RatFunc(trial);  // forced commuting pair
    }
    bool commute = (f * g.derivative() - g * f.derivative()).is_zero();
    noncommuting += commute ? 0 : 1;
    auto r = F::integrability_test(F::build_eta(FrameField::vertical(f), FrameField::vertical(g)), 24);
    CHECK(r.integrable == commute);
  }
  CHECK(noncommuting >= 5);  // the random pool genuinely exercises both sides
}

TEST_CASE("kernel bases agree across charts") {
  SectionNQ eta = F::build_eta(FrameField::vertical(rf("1")), FrameField::vertical(rf("-w^2")));
  for (double r : {0.8, 1.25})
    for (int j = 0; j < 6; ++j) {
      Cplx w = std::polar(r, 2.0 * std::numbers::pi * (j + 0.21) / 6.0);
      auto k0 = F::kernel_sample(eta, {0, w});
      auto k1 = F::kernel_sample(eta, {1, 1.0 / w});
      REQUIRE(k0.basis.size() == 2);
      REQUIRE(k1.basis.size() == 2);
      // move the second-chart vectors to the first chart: W picks up −w²
      std::vector<Eigen::Vector3cd> moved;
      for (const auto& b : k1.basis)
        moved.push_back(Eigen::Vector3cd(b(0), b(1), -w * w * b(2)));
      CHECK(span_gap(k0.basis, moved) < 1e-10);
    }
}

TEST_CASE("fiber integral functional") {
  SectionNQ flat = F::build_eta(FrameField::zero(), FrameField::zero());
  Cplx base = F::iota_invariant(flat);
  CHECK(std::abs(base - Cplx(2.0, 0.0)) < 1e-12);  // ∫_A ω_A² with unit volume

  // the Beauville-type family all maps to the same class
  for (int trial = 0; trial < 5; ++trial) {
    RatFunc f = RatFunc::from_poly(random_poly(2));
    RatFunc g = RatFunc::from_poly(random_poly(2));
    SectionNQ e = F::build_eta(FrameField::vertical(f), FrameField::vertical(g));
    CHECK(std::abs(F::iota_invariant(e) - base) < 1e-9);
  }

  // linearity: doubling the section doubles the functional
  CHECK(std::abs(F::iota_invariant(flat.scaled(GaussRat(2))) - Cplx(4.0, 0.0)) < 1e-12);

  // the (0,2)-form coefficients follow the fixed display (f, g, 1)
  SectionNQ eta = F::build_eta(FrameField::vertical(rf("1")), FrameField::vertical(rf("-w^2")));
  auto af = F::anti_form(eta);
  CHECK(af[0] == rf("1"));
  CHECK(af[1] == rf("-w^2"));
  CHECK(af[2] == rf("1"));
  CHECK_THROWS_AS(F::anti_form(SectionNQ::parallel_preimage()), std::invalid_argument);
}

TEST_CASE("harmonic generator report") {
  // oracle: the recentring maps are isometries of the fiber metric
  for (int k = 0; k < 8; ++k) {
    Cplx c = 0.7 * random_annulus_point();
    Cplx z = 0.5 * random_annulus_point();
    CHECK(isometry_defect(c, z) < 1e-12);
  }

  auto rep = F::harmonic_generator_check();
  CHECK(rep.dbar_residual == 0.0);
  CHECK(rep.dbar_star_residual <= 1e-10);
  CHECK(rep.preimage_matches);
}
