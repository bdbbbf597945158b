#pragma once
// Trigonometric-polynomial scalars and (p,q)-form fields on the flat torus
// ℂⁿ/(ℤⁿ+iℤⁿ), with exact termwise calculus, weighted L² inner products by
// tensor trapezoidal quadrature, and closed-form first-order adjoints.
//
// Coordinates: t = (x₁,y₁,…,xₙ,yₙ), z_j = x_j + i y_j.  Every scalar is a
// finite sum of factors e^{2πi κ·t} where each κ_r is a Gaussian integer
// a + i c, meaning e^{2πi a t_r}·e^{−2π c t_r}.  Purely real κ are honest
// torus characters; these form the periodic core used by grid quadrature and
// serialization.  Imaginary parts arise only through holomorphic modes such
// as e^{2πi z_j} = e^{2πi x_j} e^{−2π y_j}, which the exact termwise calculus
// (derivatives, products, closed-form cell integrals) supports but the grid
// quadrature rejects.
//
// Derivative factors per term: ∂/∂t_r ↦ 2πi κ_r,
//   ∂/∂z_j ↦ π(i κ_{2j} + κ_{2j+1}),   ∂/∂z̄_j ↦ π(i κ_{2j} − κ_{2j+1}).
// Conjugation maps κ ↦ −κ̄ componentwise (κ ↦ −κ on the periodic core).
//
// Metric conventions follow extalg.hpp: ω = i Σ dz_j∧dz̄_j with the monomial
// coframe orthonormal, dV = ωⁿ/n! = 2ⁿ·dLebesgue, so Vol(𝕋ⁿ) = 2ⁿ.  Scaling
// ω ↦ c·ω multiplies the L² norm² of a (p,q)-form by c^{n−p−q}; in particular
// norms of (n−q,0)-forms never decrease when ω is scaled up (and norms of
// (n,q)-forms never increase), which is the monotonicity both halves of the
// inverse-image argument rely on.

#include <complex>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lefschetz/extalg.hpp"

namespace lefschetz::fourier {

using alg::BigradedForm;
using alg::Cplx;
using alg::Mask;

// One Gaussian-integer frequency per real coordinate, stored (a, c) = a + ic.
using Freq = std::vector<std::pair<long, long>>;

bool freq_is_real(const Freq& f);
Freq freq_neg_conj(const Freq& f);  // κ ↦ −κ̄, the conjugation action
Freq freq_add(const Freq& a, const Freq& b);
long freq_max_abs(const Freq& f);

class TrigScalar {
 public:
  explicit TrigScalar(int n);
  static TrigScalar constant(int n, Cplx c);
  static TrigScalar mode(int n, const Freq& f, Cplx c);
  // Periodic character e^{2πi k·t} from 2n integer frequencies.
  static TrigScalar periodic_mode(int n, const std::vector<long>& k, Cplx c);
  // Holomorphic mode e^{2πi m z_j} (m may be negative: e^{2πi m x} e^{−2π m y}).
  static TrigScalar holomorphic_mode(int n, int j, long m, Cplx c);

  int dim() const { return n_; }
  const std::map<Freq, Cplx>& terms() const { return terms_; }
  void add_term(const Freq& f, Cplx c);
  bool is_zero(double tol = 0.0) const;
  double max_coeff_abs() const;
  double l1_norm() const;

  TrigScalar operator+(const TrigScalar& o) const;
  TrigScalar operator-(const TrigScalar& o) const;
  TrigScalar operator*(const TrigScalar& o) const;
  TrigScalar scaled(Cplx c) const;
  TrigScalar conj() const;

  TrigScalar deriv_t(int r) const;     // ∂/∂t_r
  TrigScalar deriv_z(int j) const;     // ∂/∂z_j, 0-based j
  TrigScalar deriv_zbar(int j) const;  // ∂/∂z̄_j

  Cplx eval(const std::vector<double>& t) const;
  bool is_periodic() const;
  bool is_real_valued(double tol = 1e-12) const;
  long max_abs_freq() const;  // max over terms and components of max(|a|,|c|)
  Cplx zero_mode() const;
  TrigScalar truncated(long cutoff) const;

  // Exact ∫_{[0,1]^{2n}} · dLebesgue (valid for Gaussian frequencies too).
  Cplx cell_integral() const;

 private:
  int n_;
  std::map<Freq, Cplx> terms_;
};

// A (p,q)-form field: one TrigScalar per coframe monomial dz_I∧dz̄_J.
struct TrigFormField {
  int n, p, q;
  std::map<std::pair<Mask, Mask>, TrigScalar> comps;

  TrigFormField(int n_, int p_, int q_);
  static TrigFormField monomial(int n, int p, int q, Mask I, Mask J, TrigScalar s);
  static TrigFormField from_constant(const BigradedForm<Cplx>& u);

  void add_comp(Mask I, Mask J, const TrigScalar& s);
  const TrigScalar* comp(Mask I, Mask J) const;  // nullptr when absent

  bool is_zero(double tol = 0.0) const;
  double max_coeff_abs() const;
  bool is_periodic() const;
  long max_abs_freq() const;  // the cutoff actually present
  TrigFormField truncated(long cutoff) const;

  TrigFormField operator+(const TrigFormField& o) const;
  TrigFormField operator-(const TrigFormField& o) const;
  TrigFormField scaled(Cplx c) const;
  TrigFormField conj() const;

  BigradedForm<Cplx> eval_at(const std::vector<double>& t) const;
  BigradedForm<Cplx> zero_mode() const;
};

TrigFormField wedge(const TrigFormField& u, const TrigFormField& v);
TrigFormField dbar(const TrigFormField& u);
TrigFormField del(const TrigFormField& u);
TrigFormField contract_z(int j, const TrigFormField& u);     // ι_{∂/∂z_j}
TrigFormField contract_zbar(int j, const TrigFormField& u);  // ι_{∂/∂z̄_j}
// ω^k ∧ u for the flat ω (constant coefficients, exact).
TrigFormField lefschetz_power_wedge(int k, const TrigFormField& u);
// Termwise inverse of v ↦ ω^q∧v on (n,q)-fields (constant ω, exact).
TrigFormField lefschetz_inverse_field(const TrigFormField& u);

// Real trigonometric weight φ for the metric e^{−φ}, with the curvature
// matrix θ_{jk} = ∂²φ/∂z_j∂z̄_k and a certified lower bound on its smallest
// eigenvalue (grid sampling plus a Lipschitz safety margin).
class SmoothPeriodicWeight {
 public:
  explicit SmoothPeriodicWeight(TrigScalar phi);
  static SmoothPeriodicWeight zero(int n);

  int dim() const { return phi_.dim(); }
  const TrigScalar& phi() const { return phi_; }
  bool is_trivial() const { return phi_.is_zero(); }
  bool is_periodic() const { return phi_.is_periodic(); }
  const std::vector<TrigScalar>& theta() const { return theta_; }  // n×n row-major
  // Row-major matrix θ(t); Hermitian for real φ.
  std::vector<Cplx> theta_at(const std::vector<double>& t) const;
  // Certified C with i∂∂̄φ ≥ −C·ω everywhere; computed lazily, cached.
  // Throws std::domain_error for non-periodic φ.
  double curvature_lower_bound() const;

 private:
  TrigScalar phi_;
  std::vector<TrigScalar> theta_;
  mutable std::optional<double> bound_;
};

TrigFormField del_h(const TrigFormField& u, const SmoothPeriodicWeight& w);
TrigFormField adjoint_dbar(const TrigFormField& u, const SmoothPeriodicWeight& w);
TrigFormField adjoint_del_h(const TrigFormField& u, const SmoothPeriodicWeight& w);
// (∂ₕ∂̄ + ∂̄∂ₕ)u, computed in closed form as ∂̄(∂φ)∧u.
TrigFormField curvature_wedge(const TrigFormField& u, const SmoothPeriodicWeight& w);

// --- quadrature -----------------------------------------------------------

// Hard cap on grid points per real dimension; LEFSCHETZ_LAB_MAX_GRID overrides
// the default of 512.
int default_grid_cap();

struct QuadratureOptions {
  double tol = 1e-10;
  int initial_grid = 8;
  int max_grid = 0;  // 0 ⇒ default_grid_cap()
};

struct Integral {
  Cplx value;
  int grid;  // points per real dimension in the accepted refinement
};

// ∫_{[0,1]^{2n}} f·e^{−φ} dLebesgue by doubling tensor trapezoid sums,
// accepted when successive refinements differ by < tol.  Requires periodic
// inputs; throws std::runtime_error when the cap is hit without convergence.
Integral integrate_cell(const TrigScalar& f, const TrigScalar* weight_phi,
                        const QuadratureOptions& opts = {});

// Mean over [0,1]^{2n} of leaf(field values at the node), same refinement and
// cap rules; for integrands that are not themselves trig polynomials (e.g.
// sorted-eigenvalue curvature densities).  Node order and the pairwise
// reduction tree are fixed, so results are bit-reproducible.
Integral integrate_node_function(int n, const std::vector<const TrigScalar*>& fields,
                                 const std::function<Cplx(const std::vector<Cplx>&)>& leaf,
                                 const QuadratureOptions& opts = {});

struct InnerProduct {
  Cplx value;
  int grid;
};

// ⟨u,v⟩ = ∫ Σ_{I,J} u_{IJ} v̄_{IJ} e^{−φ} dV_ω, with dV = 2ⁿ·dLebesgue and an
// optional homothety ω ↦ omega_scale·ω (norm² factor omega_scale^{n−p−q}).
InnerProduct inner_product_detail(const TrigFormField& u, const TrigFormField& v,
                                  const SmoothPeriodicWeight& w,
                                  double omega_scale = 1.0,
                                  const QuadratureOptions& opts = {});
Cplx inner_product(const TrigFormField& u, const TrigFormField& v,
                   const SmoothPeriodicWeight& w, double omega_scale = 1.0);
double norm_squared(const TrigFormField& u, const SmoothPeriodicWeight& w,
                    double omega_scale = 1.0);
double norm(const TrigFormField& u, const SmoothPeriodicWeight& w,
            double omega_scale = 1.0);

// Exact unweighted ‖u‖² from closed-form cell integrals (Gaussian frequencies
// allowed); equals norm_squared(u, zero weight) on the periodic core.
double cell_norm_squared(const TrigFormField& u);

// ∫ F·e^{−φ} over the torus for a top-degree (n,n) field F, via the relation
// dz_{1..n}∧dz̄_{1..n} = (−1)^{n(n−1)/2}(−i)ⁿ dV.
Integral integrate_top(const TrigFormField& f, const SmoothPeriodicWeight& w,
                       const QuadratureOptions& opts = {});

// --- identity checks ------------------------------------------------------

struct IdentityReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;
  int grid = 0;
  std::string sign_convention = "paper";
  std::vector<std::pair<std::string, double>> details;
  nlohmann::ordered_json to_json() const;
};

// For v of bidegree (n−q,0) and u = (ω^q/q!)∧v (the normalization making the
// pointwise transfer an isometry, so the flat-weight case is exact):
//   lhs = ‖∂̄u‖² + ‖∂̄*ₕu‖²,
//   rhs = ‖∂̄v‖² + ∫ Σ_{I,J} (Σ_{j∈J} λ_j(t)) |u_{IJ}(t)|² e^{−φ} dV,
// with λ the ascending eigenvalues of θ(t) and u_{IJ} its components in the
// corresponding eigencoframe.
IdentityReport bochner_check(const TrigFormField& v, const SmoothPeriodicWeight& w,
                             const QuadratureOptions& opts = {});

// ‖∂̄u‖² + ‖∂̄*u‖² − ‖D'u‖² − ‖D'*u‖² = ⟨[iθ,Λ]u, u⟩, where D' = ∂ − ∂φ∧ is
// the (1,0)-part of the canonical connection of e^{−φ} (the unique (1,0)-pair
// for which the four-norm identity closes; the opposite sign satisfies
// adjacency but leaves a first-order cross term).
IdentityReport nakano_weak_check(const TrigFormField& u, const SmoothPeriodicWeight& w,
                                 const QuadratureOptions& opts = {});

// Constant-coefficient (n,q) harmonic space of the flat weight; requires
// φ ≡ 0 and otherwise refers the caller to residual_minimizer.
std::vector<TrigFormField> harmonic_basis(int n, int q, const SmoothPeriodicWeight& w);

struct PreimageResult {
  TrigFormField alpha;
  double dbar_closed_residual;  // ‖∂̄β‖ on input
  double roundtrip_residual;    // ‖ω^q∧α − harmonic part of β‖
  double dalpha_max;            // max coefficient of dα (exactly 0 for constants)
  int grid;
};

// Flat-case inverse image: project β to its harmonic (constant) part and apply
// the pointwise inverse of ω^q∧·.  Output is d-closed by construction.
PreimageResult hard_lefschetz_preimage(const TrigFormField& beta,
                                       const SmoothPeriodicWeight& w);

// For u of bidegree (n−q,0), v of bidegree (n,q−1), the sesquilinear pairing
// {v,u} = i·v∧ū·e^{φ} carries the weight sign under which ∂ₕ = ∂ + ∂φ∧ is the
// compatible (1,0)-derivative.  Writing P = i·v∧ū, the check verifies the
// coefficientwise identity ∂̄P + ∂̄φ∧P = i·∂̄v∧ū + (−1)^{n+q−1}·i·v∧conj(∂ₕu)
// and the closed-surface integral ∫ (∂̄P + ∂̄φ∧P)·e^{φ} = 0 by quadrature.
IdentityReport stokes_identity_check(const TrigFormField& u, const TrigFormField& v,
                                     const SmoothPeriodicWeight& w,
                                     const QuadratureOptions& opts = {});

struct MinimizerResult {
  TrigFormField x;
  double residual;   // sqrt(‖∂̄x‖² + ‖∂̄*ₕx‖²)
  double condition;  // estimate for the normal equations
  int grid;
};

// Minimize ‖∂̄x‖² + ‖∂̄*ₕx‖² over x ∈ β + ∂̄{(n,q−1) fields with cutoff ≤ F}.
// Nonincreasing in F (nested subspaces); throws on ill-conditioned normal
// equations with the condition estimate in the message.
MinimizerResult residual_minimizer(const TrigFormField& beta,
                                   const SmoothPeriodicWeight& w, long cutoff);

// --- serialization --------------------------------------------------------

// {"bidegree":[p,q],"cutoff":F,"terms":[{"I":…,"J":…,"freq":[…],"re":…,"im":…}]}
// Periodic fields only (integer frequencies).
nlohmann::ordered_json field_to_json(const TrigFormField& u);
TrigFormField field_from_json(const nlohmann::json& j, int n);

}  // namespace lefschetz::fourier
