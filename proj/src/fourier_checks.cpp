#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lefschetz/fourier.hpp"
#include "lefschetz/reduction.hpp"

namespace lefschetz::fourier {

namespace {

const Cplx kI{0.0, 1.0};

// (i Σ θ_{jl} dz_j∧dz̄_l) ∧ u with the beyond-top clamp.
TrigFormField field_one_one_wedge(const std::vector<TrigScalar>& theta,
                                  const TrigFormField& u) {
  int n = u.n;
  if (u.p >= n || u.q >= n)
    return TrigFormField(n, std::min(u.p + 1, n), std::min(u.q + 1, n));
  TrigFormField out(n, u.p + 1, u.q + 1);
  for (const auto& [k, s] : u.comps) {
    Mask I = k.first, J = k.second;
    for (int j = 0; j < n; ++j) {
      if (I & (Mask{1} << j)) continue;
      for (int l = 0; l < n; ++l) {
        if (J & (Mask{1} << l)) continue;
        const TrigScalar& wjl = theta[j * n + l];
        if (wjl.terms().empty()) continue;
        int sign = alg::insertion_sign(I, j) * alg::insertion_sign(J, l);
        if (u.p & 1) sign = -sign;
        out.add_comp(I | (Mask{1} << j), J | (Mask{1} << l),
                     (wjl * s).scaled(sign < 0 ? -kI : kI));
      }
    }
  }
  return out;
}

// Dual Lefschetz operator applied componentwise (constant ω).
TrigFormField lambda_field(const TrigFormField& u) {
  TrigFormField out(u.n, std::max(u.p - 1, 0), std::max(u.q - 1, 0));
  if (u.p == 0 || u.q == 0) return out;
  for (const auto& [k, s] : u.comps) {
    BigradedForm<Cplx> unit(u.n, u.p, u.q);
    unit.add(k.first, k.second, Cplx{1.0, 0.0});
    BigradedForm<Cplx> img = alg::lambda_dual_orthonormal(unit);
    for (const auto& [ik, ic] : img.terms) out.add_comp(ik.first, ik.second, s.scaled(ic));
  }
  return out;
}

// [iθ, Λ]u as an exact trig field; equals the eigencoframe weight density
// Σ_{I,J}(Σ_{j∈J}λ_j)|u_{IJ}|² pointwise when paired with u.
TrigFormField curvature_commutator(const TrigFormField& u, const SmoothPeriodicWeight& w) {
  TrigFormField a = field_one_one_wedge(w.theta(), lambda_field(u));
  TrigFormField b = lambda_field(field_one_one_wedge(w.theta(), u));
  return a - b;
}

// (1,0)-part D' = ∂ − ∂φ∧ of the canonical connection of e^{−φ}, and its
// formal adjoint −Σ_j ι_{∂/∂z_j} ∂_{z̄_j} (the ∂φ terms cancel against the
// weight in the adjoint).
TrigFormField metric_del(const TrigFormField& u, const SmoothPeriodicWeight& w) {
  TrigFormField dphi(u.n, 1, 0);
  for (int j = 0; j < u.n; ++j) dphi.add_comp(Mask{1} << j, 0, w.phi().deriv_z(j));
  TrigFormField out = del(u);
  if (u.p < u.n) out = out - wedge(dphi, u);
  return out;
}

TrigFormField metric_del_adjoint(const TrigFormField& u, const SmoothPeriodicWeight& w) {
  (void)w;
  TrigFormField out(u.n, std::max(u.p - 1, 0), u.q);
  if (u.p == 0) return out;
  for (int j = 0; j < u.n; ++j) {
    TrigFormField slot = contract_z(j, u);
    for (const auto& [k, s] : slot.comps)
      out.add_comp(k.first, k.second, s.deriv_zbar(j).scaled(Cplx{-1.0, 0.0}));
  }
  return out;
}

struct NormTerm {
  double value;
  int grid;
};

NormTerm weighted_norm_squared(const TrigFormField& u, const SmoothPeriodicWeight& w,
                               const QuadratureOptions& opts) {
  InnerProduct ip = inner_product_detail(u, u, w, 1.0, opts);
  return {ip.value.real(), ip.grid};
}

// ∫ Σ_{I,J} (Σ_{j∈J} λ_j(t)) |u_{IJ}(t)|² e^{−φ} dV with λ/eigencoframe from
// a per-node Hermitian eigendecomposition of θ(t), eigenvalues ascending.
Integral eigen_curvature_integral(const TrigFormField& u, const SmoothPeriodicWeight& w,
                                  const QuadratureOptions& opts) {
  int n = u.n;
  bool weighted = !w.is_trivial();
  std::vector<const TrigScalar*> fields;
  if (weighted) fields.push_back(&w.phi());
  for (const auto& th : w.theta()) fields.push_back(&th);
  std::vector<std::pair<Mask, Mask>> keys;
  for (const auto& [k, s] : u.comps) {
    keys.push_back(k);
    fields.push_back(&s);
  }
  size_t off = weighted ? 1 : 0;
  Eigen::MatrixXcd th(n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es;
  std::vector<Cplx> frame(n * n);
  auto leaf = [&](const std::vector<Cplx>& vals) -> Cplx {
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) th(j, l) = vals[off + j * n + l];
    es.compute((th + th.adjoint()) / 2.0);
    const auto& lam = es.eigenvalues();
    const auto& vec = es.eigenvectors();
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) frame[j * n + l] = std::conj(vec(j, l));
    BigradedForm<Cplx> ut(n, u.p, u.q);
    for (size_t i = 0; i < keys.size(); ++i)
      ut.add(keys[i].first, keys[i].second, vals[off + n * n + i]);
    BigradedForm<Cplx> rot = alg::change_coframe(ut, frame);
    double acc = 0.0;
    for (const auto& [k, c] : rot.terms) {
      double wsum = 0.0;
      for (int j : alg::indices_from_mask(k.second)) wsum += lam(j - 1);
      acc += wsum * std::norm(c);
    }
    double weight_factor = weighted ? std::exp(-vals[0].real()) : 1.0;
    return Cplx{acc * weight_factor, 0.0};
  };
  Integral mean = integrate_node_function(n, fields, leaf, opts);
  return {mean.value * std::pow(2.0, n), mean.grid};
}

}  // namespace

nlohmann::ordered_json IdentityReport::to_json() const {
  nlohmann::ordered_json j;
  j["lhs"] = lhs;
  j["rhs"] = rhs;
  j["residual"] = residual;
  j["grid"] = grid;
  j["sign_convention"] = sign_convention;
  for (const auto& [key, value] : details) j[key] = value;
  return j;
}

IdentityReport bochner_check(const TrigFormField& v, const SmoothPeriodicWeight& w,
                             const QuadratureOptions& opts) {
  if (v.q != 0) throw std::invalid_argument("bochner_check: input must be a (n-q,0) field");
  int n = v.n;
  int q = n - v.p;
  double inv_qfact = 1.0;
  for (int s = 2; s <= q; ++s) inv_qfact /= s;
  TrigFormField u = lefschetz_power_wedge(q, v).scaled(Cplx{inv_qfact, 0.0});

  NormTerm lhs_dbar = weighted_norm_squared(dbar(u), w, opts);
  NormTerm lhs_adj = weighted_norm_squared(adjoint_dbar(u, w), w, opts);
  NormTerm rhs_dbar = weighted_norm_squared(dbar(v), w, opts);
  Integral curv = eigen_curvature_integral(u, w, opts);

  IdentityReport rep;
  rep.lhs = lhs_dbar.value + lhs_adj.value;
  rep.rhs = rhs_dbar.value + curv.value.real();
  rep.residual = std::abs(rep.lhs - rep.rhs);
  rep.grid = std::max({lhs_dbar.grid, lhs_adj.grid, rhs_dbar.grid, curv.grid});
  rep.details = {{"dbar_u", lhs_dbar.value},
                 {"dbar_star_u", lhs_adj.value},
                 {"dbar_v", rhs_dbar.value},
                 {"curvature_term", curv.value.real()}};
  return rep;
}

IdentityReport nakano_weak_check(const TrigFormField& u, const SmoothPeriodicWeight& w,
                                 const QuadratureOptions& opts) {
  NormTerm a1 = weighted_norm_squared(dbar(u), w, opts);
  NormTerm a2 = weighted_norm_squared(adjoint_dbar(u, w), w, opts);
  NormTerm a3 = weighted_norm_squared(metric_del(u, w), w, opts);
  NormTerm a4 = weighted_norm_squared(metric_del_adjoint(u, w), w, opts);
  TrigFormField comm = curvature_commutator(u, w);
  InnerProduct curv = inner_product_detail(comm, u, w, 1.0, opts);

  IdentityReport rep;
  rep.lhs = a1.value + a2.value - a3.value - a4.value;
  rep.rhs = curv.value.real();
  rep.residual = std::abs(rep.lhs - rep.rhs);
  rep.grid = std::max({a1.grid, a2.grid, a3.grid, a4.grid, curv.grid});
  rep.details = {{"dbar_u", a1.value},
                 {"dbar_star_u", a2.value},
                 {"del_metric_u", a3.value},
                 {"del_metric_star_u", a4.value},
                 {"curvature_pairing", rep.rhs}};
  return rep;
}

std::vector<TrigFormField> harmonic_basis(int n, int q, const SmoothPeriodicWeight& w) {
  if (!w.is_trivial())
    throw std::invalid_argument(
        "harmonic_basis requires the zero weight; use residual_minimizer for "
        "nonzero weights");
  if (q < 0 || q > n) throw std::invalid_argument("harmonic_basis: bad degree");
  Mask full = (Mask{1} << n) - 1;
  std::vector<TrigFormField> out;
  for (Mask J : alg::masks_of_weight(n, q))
    out.push_back(TrigFormField::monomial(n, n, q, full, J,
                                          TrigScalar::constant(n, Cplx{1.0, 0.0})));
  return out;
}

PreimageResult hard_lefschetz_preimage(const TrigFormField& beta,
                                       const SmoothPeriodicWeight& w) {
  if (!w.is_trivial())
    throw std::invalid_argument(
        "hard_lefschetz_preimage requires the zero weight; use residual_minimizer "
        "for nonzero weights");
  if (beta.p != beta.n)
    throw std::invalid_argument("hard_lefschetz_preimage: input must be a (n,q) field");
  int q = beta.q;

  double closed = 0.0;
  int grid = 0;
  if (q < beta.n) {
    NormTerm t = weighted_norm_squared(dbar(beta), w, {});
    closed = std::sqrt(std::max(0.0, t.value));
    grid = t.grid;
  }
  if (closed > 1e-9)
    throw std::invalid_argument("hard_lefschetz_preimage: input is not dbar-closed "
                                "(residual " + std::to_string(closed) + ")");

  BigradedForm<Cplx> harmonic = beta.zero_mode();
  TrigFormField alpha =
      TrigFormField::from_constant(alg::lefschetz_inverse_orthonormal(harmonic));
  TrigFormField round = lefschetz_power_wedge(q, alpha) - TrigFormField::from_constant(harmonic);
  NormTerm rt = weighted_norm_squared(round, w, {});
  double dalpha = std::max(del(alpha).max_coeff_abs(), dbar(alpha).max_coeff_abs());
  return {alpha, closed, std::sqrt(std::max(0.0, rt.value)), dalpha,
          std::max(grid, rt.grid)};
}

IdentityReport stokes_identity_check(const TrigFormField& u, const TrigFormField& v,
                                     const SmoothPeriodicWeight& w,
                                     const QuadratureOptions& opts) {
  int n = u.n;
  if (u.q != 0 || v.p != n || v.q != n - u.p - 1)
    throw std::invalid_argument(
        "stokes_identity_check: need bidegrees (n-q,0) and (n,q-1)");
  int q = n - u.p;

  TrigFormField ubar = u.conj();
  TrigFormField P = wedge(v, ubar).scaled(kI);
  TrigFormField dbarphi(n, 0, 1);
  for (int j = 0; j < n; ++j) dbarphi.add_comp(0, Mask{1} << j, w.phi().deriv_zbar(j));

  TrigFormField lhs_field = dbar(P) + wedge(dbarphi, P);
  TrigFormField t1 = wedge(dbar(v), ubar).scaled(kI);
  TrigFormField t2 = wedge(v, del_h(u, w).conj()).scaled(kI);
  Cplx sign = ((n + q - 1) & 1) ? Cplx{-1.0, 0.0} : Cplx{1.0, 0.0};
  double coeff_residual = (lhs_field - t1 - t2.scaled(sign)).max_coeff_abs();

  // ∫ d{v,u} over the closed torus; the weight e^{φ} rides inside d, so the
  // stripped integrand is lhs_field against e^{φ}.
  SmoothPeriodicWeight flipped(w.phi().scaled(Cplx{-1.0, 0.0}));
  Integral boundary = integrate_top(lhs_field, flipped, opts);

  IdentityReport rep;
  rep.lhs = std::abs(boundary.value);
  rep.rhs = 0.0;
  rep.residual = std::max(coeff_residual, rep.lhs);
  rep.grid = boundary.grid;
  rep.details = {{"coefficient_identity_residual", coeff_residual},
                 {"boundary_integral", std::abs(boundary.value)}};
  return rep;
}

namespace {

// Fourier coefficients W(μ) = ∫ e^{2πi μ·t} e^{−φ(t)} dLebesgue for the lag
// set needed by weighted Parseval sums, by doubling trapezoid refinement.
class WeightTable {
 public:
  WeightTable(const SmoothPeriodicWeight& w, const std::vector<Freq>& lags,
              const QuadratureOptions& opts)
      : n_(w.dim()) {
    if (w.is_trivial()) {
      grid_ = 0;
      for (const auto& mu : lags) table_[mu] = (freq_max_abs(mu) == 0) ? 1.0 : 0.0;
      return;
    }
    if (!w.is_periodic())
      throw std::domain_error("grid quadrature requires periodic fields");
    int cap = opts.max_grid > 0 ? opts.max_grid : default_grid_cap();
    long fmax = w.phi().max_abs_freq();
    for (const auto& mu : lags) fmax = std::max(fmax, freq_max_abs(mu));
    int M = opts.initial_grid;
    while (M <= fmax) M *= 2;
    std::map<Freq, Cplx> prev = pass(w.phi(), lags, M);
    while (true) {
      if (2 * M > cap)
        throw std::runtime_error(
            "weight table did not converge below tolerance within " +
            std::to_string(cap) + " points per dimension (set LEFSCHETZ_LAB_MAX_GRID "
            "to raise the cap)");
      M *= 2;
      std::map<Freq, Cplx> next = pass(w.phi(), lags, M);
      double delta = 0.0;
      for (const auto& [mu, val] : next) delta = std::max(delta, std::abs(val - prev.at(mu)));
      if (delta < opts.tol) {
        table_ = std::move(next);
        grid_ = M;
        return;
      }
      prev = std::move(next);
    }
  }

  Cplx at(const Freq& mu) const { return table_.at(mu); }
  int grid() const { return grid_; }

  // Weighted cell inner product Σ a_κ conj(b_λ) W(κ−λ), per matching monomial.
  Cplx pair(const TrigScalar& a, const TrigScalar& b) const {
    Cplx acc{};
    for (const auto& [fa, ca] : a.terms())
      for (const auto& [fb, cb] : b.terms()) {
        Freq mu(fa.size());
        for (size_t r = 0; r < fa.size(); ++r)
          mu[r] = {fa[r].first - fb[r].first, 0};
        acc += ca * std::conj(cb) * table_.at(mu);
      }
    return acc;
  }

  Cplx pair_fields(const TrigFormField& a, const TrigFormField& b) const {
    Cplx acc{};
    for (const auto& [k, s] : a.comps) {
      const TrigScalar* other = b.comp(k.first, k.second);
      if (other) acc += pair(s, *other);
    }
    return acc * std::pow(2.0, a.n);
  }

 private:
  static std::map<Freq, Cplx> pass(const TrigScalar& phi, const std::vector<Freq>& lags,
                                   int M) {
    int dims = 2 * phi.dim();
    long total = 1;
    for (int r = 0; r < dims; ++r) total *= M;
    // e^{−φ} on the grid (streamed once), then one character sum per lag with
    // a fixed pairwise reduction.
    std::vector<double> expphi(total);
    std::vector<double> t(dims);
    for (long node = 0; node < total; ++node) {
      long rem = node;
      for (int r = 0; r < dims; ++r) {
        t[r] = static_cast<double>(rem % M) / M;
        rem /= M;
      }
      expphi[node] = std::exp(-phi.eval(t).real());
    }
    std::map<Freq, Cplx> out;
    std::vector<Cplx> buf(total);
    for (const auto& mu : lags) {
      for (long node = 0; node < total; ++node) {
        long rem = node;
        double phase = 0.0;
        for (int r = 0; r < dims; ++r) {
          phase += static_cast<double>(mu[r].first) * static_cast<double>(rem % M) / M;
          rem /= M;
        }
        buf[node] = expphi[node] * std::exp(Cplx{0.0, 2.0 * std::numbers::pi * phase});
      }
      out[mu] = lefschetz::pairwise_sum(buf.data(), buf.size()) / static_cast<double>(total);
    }
    return out;
  }

  int n_;
  int grid_ = 0;
  std::map<Freq, Cplx> table_;
};

void collect_lags(const TrigFormField& a, const TrigFormField& b, std::map<Freq, int>& seen) {
  for (const auto& [k, s] : a.comps) {
    const TrigScalar* other = b.comp(k.first, k.second);
    if (!other) continue;
    for (const auto& [fa, ca] : s.terms())
      for (const auto& [fb, cb] : other->terms()) {
        Freq mu(fa.size());
        for (size_t r = 0; r < fa.size(); ++r) mu[r] = {fa[r].first - fb[r].first, 0};
        seen[mu] = 1;
      }
  }
}

}  // namespace

MinimizerResult residual_minimizer(const TrigFormField& beta,
                                   const SmoothPeriodicWeight& w, long cutoff) {
  if (beta.p != beta.n)
    throw std::invalid_argument("residual_minimizer: input must be a (n,q) field");
  if (beta.q < 1)
    throw std::invalid_argument("residual_minimizer: input degree has no dbar-potentials");
  int n = beta.n;
  int q = beta.q;
  if (!beta.is_periodic() || !w.is_periodic())
    throw std::domain_error("residual_minimizer requires periodic inputs");

  // Generators ∂̄g over all (n,q−1) monomials with frequencies ≤ cutoff.
  long side = 2 * cutoff + 1;
  double count = 1.0;
  for (int r = 0; r < 2 * n; ++r) count *= static_cast<double>(side);
  if (count * static_cast<double>(alg::masks_of_weight(n, q - 1).size()) > 20000.0)
    throw std::invalid_argument("residual_minimizer: truncated basis too large");

  Mask full = (Mask{1} << n) - 1;
  std::vector<TrigFormField> directions;  // D_m = ∂̄ g_m
  std::vector<TrigFormField> images;      // W_m = ∂̄*ₕ D_m
  for (Mask J : alg::masks_of_weight(n, q - 1)) {
    std::vector<long> k(2 * n, -cutoff);
    while (true) {
      TrigFormField g = TrigFormField::monomial(
          n, n, q - 1, full, J, TrigScalar::periodic_mode(n, k, Cplx{1.0, 0.0}));
      TrigFormField d = dbar(g);
      if (!d.is_zero()) {
        directions.push_back(d);
        images.push_back(adjoint_dbar(d, w));
      }
      int r = 0;
      while (r < 2 * n && k[r] == cutoff) k[r++] = -cutoff;
      if (r == 2 * n) break;
      ++k[r];
    }
  }

  TrigFormField b = adjoint_dbar(beta, w);
  TrigFormField dbeta = dbar(beta);

  std::map<Freq, int> lag_set;
  for (size_t m = 0; m < images.size(); ++m)
    for (size_t l = m; l < images.size(); ++l) collect_lags(images[m], images[l], lag_set);
  for (const auto& wm : images) {
    collect_lags(wm, b, lag_set);
    collect_lags(b, wm, lag_set);
  }
  collect_lags(b, b, lag_set);
  collect_lags(dbeta, dbeta, lag_set);
  {  // closure under negation: pair(a,b) and pair(b,a) use opposite lags
    std::vector<Freq> extra;
    for (const auto& [mu, one] : lag_set) {
      Freq neg(mu.size());
      for (size_t r = 0; r < mu.size(); ++r) neg[r] = {-mu[r].first, 0};
      extra.push_back(neg);
    }
    for (auto& mu : extra) lag_set[mu] = 1;
  }
  std::vector<Freq> lags;
  lags.reserve(lag_set.size());
  for (const auto& [mu, one] : lag_set) lags.push_back(mu);
  QuadratureOptions opts;
  WeightTable table(w, lags, opts);

  size_t K = images.size();
  Eigen::MatrixXcd G(K, K);
  Eigen::VectorXcd r(K);
  for (size_t m = 0; m < K; ++m) {
    for (size_t l = m; l < K; ++l) {
      Cplx val = table.pair_fields(images[m], images[l]);
      G(m, l) = val;
      G(l, m) = std::conj(val);
    }
    r(m) = table.pair_fields(images[m], b);
  }

  // Stationarity in conj(c) gives Σ_m G(m,l) c_m = −conj(r_l), i.e.
  // G·conj(c) = −r for Hermitian G; solve for y = conj(c) on the nonnull
  // spectrum and conjugate back.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
  double lam_max = K ? std::max(0.0, es.eigenvalues().maxCoeff()) : 0.0;
  double null_cut = lam_max * 1e-12;
  double lam_min_kept = lam_max;
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(K);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(K); ++i) {
    double lam = es.eigenvalues()(i);
    if (lam <= null_cut) continue;  // ker ∂̄ directions contribute nothing
    lam_min_kept = std::min(lam_min_kept, lam);
    Eigen::VectorXcd vec = es.eigenvectors().col(i);
    y -= vec * (vec.dot(r) / lam);
  }
  double condition = (lam_max > 0.0 && lam_min_kept > 0.0) ? lam_max / lam_min_kept : 1.0;
  if (condition > 1e13)
    throw std::runtime_error("residual_minimizer: ill-conditioned normal equations "
                             "(condition estimate " + std::to_string(condition) + ")");

  TrigFormField x = beta;
  TrigFormField s = b;
  for (size_t m = 0; m < K; ++m) {
    Cplx coef = std::conj(y(m));
    if (coef == Cplx{}) continue;
    x = x + directions[m].scaled(coef);
    s = s + images[m].scaled(coef);
  }
  double res2 = table.pair_fields(dbeta, dbeta).real() + table.pair_fields(s, s).real();
  return {x, std::sqrt(std::max(0.0, res2)), condition, table.grid()};
}

}  // namespace lefschetz::fourier
