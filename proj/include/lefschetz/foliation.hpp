#pragma once
// Exact frame calculus on the product of a flat abelian surface A with the
// projective line: X = A × P¹ carries the global product frame (U, V, W)
// where U, V are parallel fields on A and W is the affine coordinate field
// on a P¹ chart.  Vector fields and twisted 1-forms are stored with exact
// rational-function coefficients (Gaussian-rational polynomials in the chart
// coordinate w, two charts glued by w ↦ 1/w).
//
// The main objects are
//   * build_eta(S, T): the orthogonal-splitting section η of Ω¹ ⊗ (−K_X)
//     attached to the rank-2 subbundle spanned by U+S, V+T (S = fW, T = gW
//     vertical), with the identification fU+gV−W ↔ −(1+f²+g²)·U∧V∧W
//     absorbed so the coefficients are polynomial: η = (−f, −g, 1) in the
//     coframe (U*, V*, W*) tensor the canonical frame of −K_X;
//   * interior-product matrices ι_ξ v, their kernels, and a Lie-bracket
//     integrability test of the kernel distribution;
//   * the fiber-integral functional on ω²∧η, constant in (S, T).
#include <array>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lefschetz/rational.hpp"

namespace lefschetz::foliation {

using Cplx = std::complex<double>;

// Exact Gaussian rational a + bi.
struct GaussRat {
  Rational re{0}, im{0};

  GaussRat() = default;
  GaussRat(long v) : re(v) {}  // NOLINT: implicit by design
  GaussRat(Rational r) : re(std::move(r)) {}
  GaussRat(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  static GaussRat unit_i() { return {Rational(0), Rational(1)}; }

  bool is_zero() const { return re == 0 && im == 0; }
  GaussRat conj() const { return {re, -im}; }
  Cplx value() const { return {to_double(re), to_double(im)}; }

  GaussRat operator-() const { return {-re, -im}; }
  GaussRat operator+(const GaussRat& o) const { return {re + o.re, im + o.im}; }
  GaussRat operator-(const GaussRat& o) const { return {re - o.re, im - o.im}; }
  GaussRat operator*(const GaussRat& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
  }
  GaussRat inverse() const;
  GaussRat operator/(const GaussRat& o) const { return *this * o.inverse(); }
  bool operator==(const GaussRat& o) const { return re == o.re && im == o.im; }
  bool operator!=(const GaussRat& o) const { return !(*this == o); }
};

// Polynomial in the chart coordinate w with GaussRat coefficients.
struct PolyW {
  std::vector<GaussRat> c;  // c[k] · w^k

  PolyW() = default;
  explicit PolyW(GaussRat a) : c{std::move(a)} { trim(); }
  static PolyW variable() { return from_coeffs({GaussRat(0), GaussRat(1)}); }
  static PolyW from_coeffs(std::vector<GaussRat> cs);

  void trim();
  int degree() const { return static_cast<int>(c.size()) - 1; }  // −1 for zero
  bool is_zero() const { return c.empty(); }
  GaussRat coeff(int k) const { return k < static_cast<int>(c.size()) ? c[k] : GaussRat(); }
  GaussRat leading() const;

  PolyW operator+(const PolyW& o) const;
  PolyW operator-(const PolyW& o) const;
  PolyW operator*(const PolyW& o) const;
  PolyW operator-() const;
  bool operator==(const PolyW& o) const { return c == o.c; }
  bool operator!=(const PolyW& o) const { return !(*this == o); }

  PolyW derivative() const;
  PolyW reversed() const;             // w^deg · p(1/w)
  PolyW times_power(int k) const;     // p · w^k
  Cplx eval(Cplx w) const;
  std::string to_string() const;
};

// quotient and remainder of a by b (b nonzero)
std::pair<PolyW, PolyW> poly_divmod(const PolyW& a, const PolyW& b);
PolyW poly_gcd(PolyW a, PolyW b);  // monic
PolyW parse_poly_w(const std::string& text);

// Reduced rational function num/den, den monic.
struct RatFunc {
  PolyW num, den{GaussRat(1)};

  RatFunc() = default;
  RatFunc(PolyW n, PolyW d);
  RatFunc(long v) : RatFunc(PolyW(GaussRat(v)), PolyW(GaussRat(1))) {}  // NOLINT
  static RatFunc from_poly(PolyW p) { return {std::move(p), PolyW(GaussRat(1))}; }

  bool is_zero() const { return num.is_zero(); }
  bool is_polynomial() const { return den.degree() == 0; }

  RatFunc operator+(const RatFunc& o) const;
  RatFunc operator-(const RatFunc& o) const;
  RatFunc operator*(const RatFunc& o) const;
  RatFunc operator/(const RatFunc& o) const;
  RatFunc operator-() const;
  bool operator==(const RatFunc& o) const;
  bool operator!=(const RatFunc& o) const { return !(*this == o); }

  RatFunc derivative() const;
  RatFunc reciprocal_substitution() const;  // w ↦ 1/w
  Cplx eval(Cplx w) const;                  // throws on a pole
  std::string to_string() const;
};

struct ChartPoint {
  int chart = 0;  // 0: w-chart, 1: the 1/w chart
  Cplx w;
};

// Vector field a·U + b·V + c·W with rational-function coefficients kept in
// both charts.  The transition is (a, b, c)(w) ↦ (a(1/ŵ), b(1/ŵ), −ŵ²c(1/ŵ)).
struct FrameField {
  std::array<RatFunc, 3> chart0, chart1;  // coefficients of (U, V, W)

  static FrameField from_chart0(RatFunc a, RatFunc b, RatFunc c);
  static FrameField from_charts(std::array<RatFunc, 3> c0, std::array<RatFunc, 3> c1);
  static FrameField vertical(const RatFunc& f) { return from_chart0(RatFunc(0), RatFunc(0), f); }
  static FrameField zero() { return from_chart0(RatFunc(0), RatFunc(0), RatFunc(0)); }

  bool is_vertical() const { return chart0[0].is_zero() && chart0[1].is_zero(); }
  bool is_zero() const;
  const std::array<RatFunc, 3>& coeffs(int chart) const { return chart ? chart1 : chart0; }
  std::array<Cplx, 3> eval(const ChartPoint& x) const;

  // Largest frame-coefficient mismatch between the two chart representations
  // over a fixed grid in the overlap annulus 1/2 < |w| < 2.
  double transition_defect() const;
  void validate() const;  // throws when the defect exceeds 1e−9
};

FrameField lie_bracket(const FrameField& x, const FrameField& y);

// A holomorphic form in the frame coframe: degree 1 stores coefficients on
// (U*, V*, W*), degree 2 on (U*∧V*, U*∧W*, V*∧W*).  canonical_twist marks
// sections carrying the ⊗(U∧V∧W) frame of −K_X (the build_eta output).
struct SectionNQ {
  int form_degree = 1;
  bool canonical_twist = false;
  std::array<RatFunc, 3> chart0, chart1;

  static SectionNQ zero(int degree);
  static SectionNQ parallel_preimage();  // the plain 2-form U*∧V*
  const std::array<RatFunc, 3>& coeffs(int chart) const { return chart ? chart1 : chart0; }
  SectionNQ scaled(const GaussRat& s) const;
};

// η for the splitting attached to U+S, V+T; S, T must be vertical.
SectionNQ build_eta(const FrameField& s, const FrameField& t);

// Matrix of ξ ↦ ι_ξ v at x: rows index the target coframe basis, columns the
// frame directions (U, V, W).  Degree 1 gives a 1×3 row, degree 2 a 3×3
// antisymmetric matrix.
Eigen::MatrixXcd interior_matrix(const SectionNQ& v, const ChartPoint& x);

struct DistributionSample {
  ChartPoint at;
  std::vector<Eigen::Vector3cd> basis;  // kernel basis, unit vectors
  int rank = 0;                         // rank of the interior-product matrix
};

DistributionSample kernel_sample(const SectionNQ& v, const ChartPoint& x);

// Max interior-matrix rank over 50 deterministic sample points in both charts.
int generic_rank(const SectionNQ& v);

struct IntegrabilityReport {
  bool integrable = true;
  bool has_witness = false;
  ChartPoint witness;
  std::vector<Cplx> residual;  // value of ι_{[X_i,X_j]} v at the witness
};

// Symbolic Lie-bracket closedness of Ker(ι_• v) on a rational kernel basis,
// with rank constancy verified on the sample set first.
IntegrabilityReport integrability_test(const SectionNQ& v, int samples = 32);

// ω²∧v as a (0,2)-form: coefficients of (V̄*∧W̄*, Ū*∧W̄*, Ū*∧V̄*).
// For η this is (f, g, 1).
std::array<RatFunc, 3> anti_form(const SectionNQ& v);

// Fiber integral of ω²∧v against i·U*∧V* over A × {x}: only the Ū*∧V̄*
// component survives, and the flat-cell normalization ∫_A ω_A² = 2 is a
// recorded convention picked so the S = T = 0 value is the positive constant.
Cplx iota_invariant(const SectionNQ& v);

struct HarmonicReport {
  double dbar_residual = 0.0;       // ∂̄(Ū*∧V̄*), exact frame derivative
  double dbar_star_residual = 0.0;  // −⋆∂⋆ data at normal chart centers
  bool preimage_matches = false;    // ω²∧η₀,₀ equals the harmonic generator
};

HarmonicReport harmonic_generator_check();

}  // namespace lefschetz::foliation
