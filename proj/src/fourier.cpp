#include "lefschetz/fourier.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

#include "lefschetz/reduction.hpp"

namespace lefschetz::fourier {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Cplx kI{0.0, 1.0};
}  // namespace

bool freq_is_real(const Freq& f) {
  return std::all_of(f.begin(), f.end(), [](const auto& k) { return k.second == 0; });
}

Freq freq_neg_conj(const Freq& f) {
  Freq out(f.size());
  for (size_t r = 0; r < f.size(); ++r) out[r] = {-f[r].first, f[r].second};
  return out;
}

Freq freq_add(const Freq& a, const Freq& b) {
  Freq out(a.size());
  for (size_t r = 0; r < a.size(); ++r)
    out[r] = {a[r].first + b[r].first, a[r].second + b[r].second};
  return out;
}

long freq_max_abs(const Freq& f) {
  long m = 0;
  for (const auto& k : f) m = std::max({m, std::labs(k.first), std::labs(k.second)});
  return m;
}

// --- TrigScalar -----------------------------------------------------------

TrigScalar::TrigScalar(int n) : n_(n) {
  if (n < 1 || n > 16) throw std::invalid_argument("TrigScalar: bad dimension");
}

TrigScalar TrigScalar::constant(int n, Cplx c) {
  TrigScalar s(n);
  s.add_term(Freq(2 * n, {0, 0}), c);
  return s;
}

TrigScalar TrigScalar::mode(int n, const Freq& f, Cplx c) {
  TrigScalar s(n);
  s.add_term(f, c);
  return s;
}

TrigScalar TrigScalar::periodic_mode(int n, const std::vector<long>& k, Cplx c) {
  if (static_cast<int>(k.size()) != 2 * n)
    throw std::invalid_argument("periodic_mode: need 2n frequencies");
  Freq f(2 * n, {0, 0});
  for (int r = 0; r < 2 * n; ++r) f[r].first = k[r];
  return mode(n, f, c);
}

TrigScalar TrigScalar::holomorphic_mode(int n, int j, long m, Cplx c) {
  // e^{2πi m z_j} = e^{2πi m x_j} e^{−2π m y_j}: κ_x = m, κ_y = i m.
  Freq f(2 * n, {0, 0});
  f[2 * j].first = m;
  f[2 * j + 1].second = m;
  return mode(n, f, c);
}

void TrigScalar::add_term(const Freq& f, Cplx c) {
  if (static_cast<int>(f.size()) != 2 * n_)
    throw std::invalid_argument("add_term: frequency has wrong length");
  auto it = terms_.find(f);
  if (it == terms_.end()) {
    if (c != Cplx{}) terms_.emplace(f, c);
    return;
  }
  it->second += c;
  if (it->second == Cplx{}) terms_.erase(it);
}

bool TrigScalar::is_zero(double tol) const {
  return max_coeff_abs() <= tol;
}

double TrigScalar::max_coeff_abs() const {
  double m = 0.0;
  for (const auto& [f, c] : terms_) m = std::max(m, std::abs(c));
  return m;
}

double TrigScalar::l1_norm() const {
  double s = 0.0;
  for (const auto& [f, c] : terms_) s += std::abs(c);
  return s;
}

TrigScalar TrigScalar::operator+(const TrigScalar& o) const {
  TrigScalar out = *this;
  for (const auto& [f, c] : o.terms_) out.add_term(f, c);
  return out;
}

TrigScalar TrigScalar::operator-(const TrigScalar& o) const {
  TrigScalar out = *this;
  for (const auto& [f, c] : o.terms_) out.add_term(f, -c);
  return out;
}

TrigScalar TrigScalar::operator*(const TrigScalar& o) const {
  TrigScalar out(n_);
  for (const auto& [fa, ca] : terms_)
    for (const auto& [fb, cb] : o.terms_) out.add_term(freq_add(fa, fb), ca * cb);
  return out;
}

TrigScalar TrigScalar::scaled(Cplx c) const {
  TrigScalar out(n_);
  for (const auto& [f, v] : terms_) out.add_term(f, v * c);
  return out;
}

TrigScalar TrigScalar::conj() const {
  TrigScalar out(n_);
  for (const auto& [f, v] : terms_) out.add_term(freq_neg_conj(f), std::conj(v));
  return out;
}

TrigScalar TrigScalar::deriv_t(int r) const {
  TrigScalar out(n_);
  for (const auto& [f, v] : terms_) {
    Cplx kappa(static_cast<double>(f[r].first), static_cast<double>(f[r].second));
    out.add_term(f, v * kTwoPi * kI * kappa);
  }
  return out;
}

TrigScalar TrigScalar::deriv_z(int j) const {
  TrigScalar out(n_);
  for (const auto& [f, v] : terms_) {
    Cplx kx(static_cast<double>(f[2 * j].first), static_cast<double>(f[2 * j].second));
    Cplx ky(static_cast<double>(f[2 * j + 1].first), static_cast<double>(f[2 * j + 1].second));
    out.add_term(f, v * (kPi * kI * kx + kPi * ky));
  }
  return out;
}

TrigScalar TrigScalar::deriv_zbar(int j) const {
  TrigScalar out(n_);
  for (const auto& [f, v] : terms_) {
    Cplx kx(static_cast<double>(f[2 * j].first), static_cast<double>(f[2 * j].second));
    Cplx ky(static_cast<double>(f[2 * j + 1].first), static_cast<double>(f[2 * j + 1].second));
    out.add_term(f, v * (kPi * kI * kx - kPi * ky));
  }
  return out;
}

Cplx TrigScalar::eval(const std::vector<double>& t) const {
  if (static_cast<int>(t.size()) != 2 * n_)
    throw std::invalid_argument("eval: point has wrong dimension");
  Cplx total{};
  for (const auto& [f, c] : terms_) {
    Cplx phase{};
    for (int r = 0; r < 2 * n_; ++r) {
      Cplx kappa(static_cast<double>(f[r].first), static_cast<double>(f[r].second));
      phase += kappa * t[r];
    }
    total += c * std::exp(kTwoPi * kI * phase);
  }
  return total;
}

bool TrigScalar::is_periodic() const {
  return std::all_of(terms_.begin(), terms_.end(),
                     [](const auto& kv) { return freq_is_real(kv.first); });
}

bool TrigScalar::is_real_valued(double tol) const {
  for (const auto& [f, c] : terms_) {
    auto it = terms_.find(freq_neg_conj(f));
    Cplx mirror = (it == terms_.end()) ? Cplx{} : it->second;
    if (std::abs(std::conj(c) - mirror) > tol) return false;
  }
  return true;
}

long TrigScalar::max_abs_freq() const {
  long m = 0;
  for (const auto& [f, c] : terms_) m = std::max(m, freq_max_abs(f));
  return m;
}

Cplx TrigScalar::zero_mode() const {
  auto it = terms_.find(Freq(2 * n_, {0, 0}));
  return it == terms_.end() ? Cplx{} : it->second;
}

TrigScalar TrigScalar::truncated(long cutoff) const {
  TrigScalar out(n_);
  for (const auto& [f, c] : terms_)
    if (freq_max_abs(f) <= cutoff) out.add_term(f, c);
  return out;
}

Cplx TrigScalar::cell_integral() const {
  Cplx total{};
  for (const auto& [f, c] : terms_) {
    Cplx prod = c;
    for (const auto& [a, cc] : f) {
      if (a == 0 && cc == 0) continue;
      if (cc == 0) {  // honest character: integrates to zero exactly
        prod = Cplx{};
        break;
      }
      // ∫₀¹ e^{2πiκt} dt = (e^{2πiκ} − 1)/(2πiκ) with e^{2πiκ} = e^{−2πc}.
      Cplx kappa(static_cast<double>(a), static_cast<double>(cc));
      prod *= (std::exp(-kTwoPi * cc) - 1.0) / (kTwoPi * kI * kappa);
    }
    total += prod;
  }
  return total;
}

// --- TrigFormField --------------------------------------------------------

TrigFormField::TrigFormField(int n_, int p_, int q_) : n(n_), p(p_), q(q_) {
  if (n < 1 || n > 16 || p < 0 || q < 0 || p > n || q > n)
    throw std::invalid_argument("TrigFormField: bad bidegree");
}

TrigFormField TrigFormField::monomial(int n, int p, int q, Mask I, Mask J, TrigScalar s) {
  TrigFormField out(n, p, q);
  out.add_comp(I, J, s);
  return out;
}

TrigFormField TrigFormField::from_constant(const BigradedForm<Cplx>& u) {
  TrigFormField out(u.n, u.p, u.q);
  for (const auto& [k, c] : u.terms)
    out.add_comp(k.first, k.second, TrigScalar::constant(u.n, c));
  return out;
}

void TrigFormField::add_comp(Mask I, Mask J, const TrigScalar& s) {
  if (alg::weight(I) != p || alg::weight(J) != q)
    throw std::invalid_argument("add_comp: mask weights do not match bidegree");
  if (s.dim() != n) throw std::invalid_argument("add_comp: scalar dimension mismatch");
  auto key = std::make_pair(I, J);
  auto it = comps.find(key);
  if (it == comps.end()) {
    if (!s.terms().empty()) comps.emplace(key, s);
    return;
  }
  it->second = it->second + s;
  if (it->second.terms().empty()) comps.erase(it);
}

const TrigScalar* TrigFormField::comp(Mask I, Mask J) const {
  auto it = comps.find(std::make_pair(I, J));
  return it == comps.end() ? nullptr : &it->second;
}

bool TrigFormField::is_zero(double tol) const {
  return max_coeff_abs() <= tol;
}

double TrigFormField::max_coeff_abs() const {
  double m = 0.0;
  for (const auto& [k, s] : comps) m = std::max(m, s.max_coeff_abs());
  return m;
}

bool TrigFormField::is_periodic() const {
  return std::all_of(comps.begin(), comps.end(),
                     [](const auto& kv) { return kv.second.is_periodic(); });
}

long TrigFormField::max_abs_freq() const {
  long m = 0;
  for (const auto& [k, s] : comps) m = std::max(m, s.max_abs_freq());
  return m;
}

TrigFormField TrigFormField::truncated(long cutoff) const {
  TrigFormField out(n, p, q);
  for (const auto& [k, s] : comps) out.add_comp(k.first, k.second, s.truncated(cutoff));
  return out;
}

TrigFormField TrigFormField::operator+(const TrigFormField& o) const {
  if (comps.empty() && (p != o.p || q != o.q)) return o;
  if (o.comps.empty() && (p != o.p || q != o.q)) return *this;
  if (n != o.n || p != o.p || q != o.q)
    throw std::invalid_argument("field sum: bidegree mismatch");
  TrigFormField out = *this;
  for (const auto& [k, s] : o.comps) out.add_comp(k.first, k.second, s);
  return out;
}

TrigFormField TrigFormField::operator-(const TrigFormField& o) const {
  return *this + o.scaled(Cplx{-1.0, 0.0});
}

TrigFormField TrigFormField::scaled(Cplx c) const {
  TrigFormField out(n, p, q);
  for (const auto& [k, s] : comps) out.add_comp(k.first, k.second, s.scaled(c));
  return out;
}

TrigFormField TrigFormField::conj() const {
  TrigFormField out(n, q, p);
  Cplx sign = ((p * q) & 1) ? Cplx{-1.0, 0.0} : Cplx{1.0, 0.0};
  for (const auto& [k, s] : comps) out.add_comp(k.second, k.first, s.conj().scaled(sign));
  return out;
}

BigradedForm<Cplx> TrigFormField::eval_at(const std::vector<double>& t) const {
  BigradedForm<Cplx> out(n, p, q);
  for (const auto& [k, s] : comps) out.add(k.first, k.second, s.eval(t));
  return out;
}

BigradedForm<Cplx> TrigFormField::zero_mode() const {
  BigradedForm<Cplx> out(n, p, q);
  for (const auto& [k, s] : comps) out.add(k.first, k.second, s.zero_mode());
  return out;
}

TrigFormField wedge(const TrigFormField& u, const TrigFormField& v) {
  if (u.n != v.n) throw std::invalid_argument("wedge: mismatched fiber dimension");
  int p = u.p + v.p, q = u.q + v.q;
  if (p > u.n || q > u.n)
    throw std::invalid_argument("wedge: resulting bidegree (" + std::to_string(p) + "," +
                                std::to_string(q) + ") exceeds (n,n) with n=" + std::to_string(u.n));
  TrigFormField out(u.n, p, q);
  for (const auto& [ku, su] : u.comps) {
    for (const auto& [kv, sv] : v.comps) {
      Mask I1 = ku.first, J1 = ku.second, I2 = kv.first, J2 = kv.second;
      if ((I1 & I2) || (J1 & J2)) continue;
      int sign = alg::merge_sign(I1, I2) * alg::merge_sign(J1, J2);
      if ((alg::weight(J1) * alg::weight(I2)) & 1) sign = -sign;
      TrigScalar s = su * sv;
      if (sign < 0) s = s.scaled(Cplx{-1.0, 0.0});
      out.add_comp(I1 | I2, J1 | J2, s);
    }
  }
  return out;
}

TrigFormField dbar(const TrigFormField& u) {
  TrigFormField out(u.n, u.p, std::min(u.q + 1, u.n));
  if (u.q >= u.n) return out;
  for (const auto& [k, s] : u.comps) {
    Mask I = k.first, J = k.second;
    for (int j = 0; j < u.n; ++j) {
      if (J & (Mask{1} << j)) continue;
      TrigScalar ds = s.deriv_zbar(j);
      if (ds.terms().empty()) continue;
      // dz̄_j crosses the p dz factors, then inserts into the dz̄ block.
      int sign = alg::insertion_sign(J, j);
      if (u.p & 1) sign = -sign;
      if (sign < 0) ds = ds.scaled(Cplx{-1.0, 0.0});
      out.add_comp(I, J | (Mask{1} << j), ds);
    }
  }
  return out;
}

TrigFormField del(const TrigFormField& u) {
  TrigFormField out(u.n, std::min(u.p + 1, u.n), u.q);
  if (u.p >= u.n) return out;
  for (const auto& [k, s] : u.comps) {
    Mask I = k.first, J = k.second;
    for (int j = 0; j < u.n; ++j) {
      if (I & (Mask{1} << j)) continue;
      TrigScalar ds = s.deriv_z(j);
      if (ds.terms().empty()) continue;
      int sign = alg::insertion_sign(I, j);
      if (sign < 0) ds = ds.scaled(Cplx{-1.0, 0.0});
      out.add_comp(I | (Mask{1} << j), J, ds);
    }
  }
  return out;
}

TrigFormField contract_z(int j, const TrigFormField& u) {
  if (u.p < 1) throw std::invalid_argument("contract_z: form has no dz factors");
  TrigFormField out(u.n, u.p - 1, u.q);
  for (const auto& [k, s] : u.comps) {
    Mask I = k.first;
    if (!(I & (Mask{1} << j))) continue;
    TrigScalar v = s;
    if (alg::position_in(I, j) & 1) v = v.scaled(Cplx{-1.0, 0.0});
    out.add_comp(I & ~(Mask{1} << j), k.second, v);
  }
  return out;
}

TrigFormField contract_zbar(int j, const TrigFormField& u) {
  if (u.q < 1) throw std::invalid_argument("contract_zbar: form has no dz̄ factors");
  TrigFormField out(u.n, u.p, u.q - 1);
  for (const auto& [k, s] : u.comps) {
    Mask J = k.second;
    if (!(J & (Mask{1} << j))) continue;
    TrigScalar v = s;
    if ((u.p + alg::position_in(J, j)) & 1) v = v.scaled(Cplx{-1.0, 0.0});
    out.add_comp(k.first, J & ~(Mask{1} << j), v);
  }
  return out;
}

TrigFormField lefschetz_power_wedge(int k, const TrigFormField& u) {
  TrigFormField acc = u;
  for (int s = 0; s < k; ++s) {
    TrigFormField next(acc.n, std::min(acc.p + 1, acc.n), std::min(acc.q + 1, acc.n));
    if (acc.p < acc.n && acc.q < acc.n) {
      for (const auto& [key, sc] : acc.comps) {
        BigradedForm<Cplx> unit(acc.n, acc.p, acc.q);
        unit.add(key.first, key.second, Cplx{1.0, 0.0});
        BigradedForm<Cplx> img = alg::lefschetz_L_orthonormal(unit);
        for (const auto& [ik, ic] : img.terms)
          next.add_comp(ik.first, ik.second, sc.scaled(ic));
      }
    }
    acc = next;
  }
  return acc;
}

TrigFormField lefschetz_inverse_field(const TrigFormField& u) {
  if (u.p != u.n) throw std::invalid_argument("lefschetz_inverse_field: need a (n,q) field");
  int q = u.q;
  TrigFormField out(u.n, u.n - q, 0);
  for (const auto& [key, sc] : u.comps) {
    BigradedForm<Cplx> unit(u.n, u.n, q);
    unit.add(key.first, key.second, Cplx{1.0, 0.0});
    BigradedForm<Cplx> pre = alg::lefschetz_inverse_orthonormal(unit);
    for (const auto& [ik, ic] : pre.terms) out.add_comp(ik.first, ik.second, sc.scaled(ic));
  }
  return out;
}

// --- SmoothPeriodicWeight -------------------------------------------------

SmoothPeriodicWeight::SmoothPeriodicWeight(TrigScalar phi) : phi_(std::move(phi)) {
  if (!phi_.is_real_valued(1e-12))
    throw std::invalid_argument("weight must be real-valued");
  int n = phi_.dim();
  theta_.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) theta_.push_back(phi_.deriv_z(j).deriv_zbar(k));
}

SmoothPeriodicWeight SmoothPeriodicWeight::zero(int n) {
  return SmoothPeriodicWeight(TrigScalar(n));
}

std::vector<Cplx> SmoothPeriodicWeight::theta_at(const std::vector<double>& t) const {
  std::vector<Cplx> out;
  out.reserve(theta_.size());
  for (const auto& s : theta_) out.push_back(s.eval(t));
  return out;
}

double SmoothPeriodicWeight::curvature_lower_bound() const {
  if (bound_) return *bound_;
  if (!is_periodic())
    throw std::domain_error("curvature bound requires a periodic weight");
  int n = phi_.dim();
  int dims = 2 * n;
  // Sample density chosen so the total node count stays near a million; the
  // Lipschitz margin below keeps the bound certified regardless of density.
  int M = n == 1 ? 256 : (n == 2 ? 32 : 8);
  M = std::max<long>(M, 2 * phi_.max_abs_freq() + 1);

  double min_eig = 0.0;  // λ_min of the zero matrix when φ ≡ 0
  bool first = true;
  std::vector<double> t(dims, 0.0);
  Eigen::MatrixXcd theta(n, n);
  long total = 1;
  for (int r = 0; r < dims; ++r) total *= M;
  for (long node = 0; node < total; ++node) {
    long rem = node;
    for (int r = 0; r < dims; ++r) {
      t[r] = static_cast<double>(rem % M) / M;
      rem /= M;
    }
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) theta(j, k) = theta_[j * n + k].eval(t);
    double lam;
    if (n == 1) {
      lam = theta(0, 0).real();
    } else if (n == 2) {
      double a = theta(0, 0).real(), d = theta(1, 1).real();
      Cplx b = (theta(0, 1) + std::conj(theta(1, 0))) / 2.0;
      lam = (a + d) / 2.0 - std::sqrt((a - d) * (a - d) / 4.0 + std::norm(b));
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
          (theta + theta.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
      lam = es.eigenvalues().minCoeff();
    }
    min_eig = first ? lam : std::min(min_eig, lam);
    first = false;
  }

  // Lipschitz margin: |λ_min(θ(x)) − λ_min(θ(y))| ≤ ‖θ(x)−θ(y)‖_F.  Every t
  // lies within 1/(2M) of a node in each coordinate, and entry e moves by at
  // most Σ_r sup|∂θ_e/∂t_r| / (2M) with sup|∂θ_e/∂t_r| ≤ 2π Σ |κ_r||coeff|.
  double sq = 0.0;
  for (const auto& entry : theta_) {
    double move = 0.0;
    for (int r = 0; r < dims; ++r) {
      double g = 0.0;
      for (const auto& [f, c] : entry.terms())
        g += kTwoPi * std::abs(static_cast<double>(f[r].first)) * std::abs(c);
      move += g;
    }
    sq += move * move;
  }
  double pad = std::sqrt(sq) / (2.0 * M);
  bound_ = -(min_eig - pad);
  return *bound_;
}

TrigFormField del_h(const TrigFormField& u, const SmoothPeriodicWeight& w) {
  TrigFormField dphi(u.n, 1, 0);
  for (int j = 0; j < u.n; ++j) dphi.add_comp(Mask{1} << j, 0, w.phi().deriv_z(j));
  TrigFormField out = del(u);
  if (u.p < u.n) out = out + wedge(dphi, u);
  return out;
}

TrigFormField adjoint_dbar(const TrigFormField& u, const SmoothPeriodicWeight& w) {
  TrigFormField out(u.n, u.p, std::max(u.q - 1, 0));
  if (u.q == 0) return out;
  for (int j = 0; j < u.n; ++j) {
    TrigFormField slot = contract_zbar(j, u);
    TrigScalar phi_zj = w.phi().deriv_z(j);
    for (const auto& [k, s] : slot.comps) {
      // (∂_{z̄_j})* = −∂_{z_j} + (∂_{z_j}φ)· against the measure e^{−φ} dV.
      out.add_comp(k.first, k.second, s.deriv_z(j).scaled(Cplx{-1.0, 0.0}) + phi_zj * s);
    }
  }
  return out;
}

TrigFormField adjoint_del_h(const TrigFormField& u, const SmoothPeriodicWeight& w) {
  TrigFormField out(u.n, std::max(u.p - 1, 0), u.q);
  if (u.p == 0) return out;
  for (int j = 0; j < u.n; ++j) {
    TrigFormField slot = contract_z(j, u);
    TrigScalar phi_zbarj = w.phi().deriv_zbar(j);
    TrigScalar conj_phi_zj = w.phi().deriv_z(j).conj();
    for (const auto& [k, s] : slot.comps) {
      // ∂* contributes (∂_{z_j})* = −∂_{z̄_j} + (∂_{z̄_j}φ)·; the pointwise
      // adjoint of ∂φ∧· adds conj(∂_{z_j}φ)·.
      out.add_comp(k.first, k.second,
                   s.deriv_zbar(j).scaled(Cplx{-1.0, 0.0}) + phi_zbarj * s + conj_phi_zj * s);
    }
  }
  return out;
}

TrigFormField curvature_wedge(const TrigFormField& u, const SmoothPeriodicWeight& w) {
  // ∂̄(∂φ) = −Σ θ_{jk} dz_j∧dz̄_k with θ_{jk} = ∂²φ/∂z_j∂z̄_k.
  int n = u.n;
  TrigFormField b(n, 1, 1);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      b.add_comp(Mask{1} << j, Mask{1} << k, w.theta()[j * n + k].scaled(Cplx{-1.0, 0.0}));
  if (u.p >= n || u.q >= n)
    return TrigFormField(n, std::min(u.p + 1, n), std::min(u.q + 1, n));
  return wedge(b, u);
}

// --- quadrature -----------------------------------------------------------

int default_grid_cap() {
  if (const char* env = std::getenv("LEFSCHETZ_LAB_MAX_GRID")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 8) return static_cast<int>(v);
  }
  return 512;
}

namespace {

using Leaf = std::function<Cplx(const std::vector<Cplx>&)>;

// Tensor-grid trapezoid mean of leaf(field values) with per-dimension
// character tables and a fixed pairwise reduction order (bit-reproducible
// regardless of any outer parallelism).  Per-term running products are kept
// per recursion level, so each node costs O(total terms) with no exp calls.
class GridSum {
 public:
  GridSum(const std::vector<const TrigScalar*>& fields, const Leaf& leaf, int dims, int M)
      : dims_(dims), M_(M), leaf_fn_(leaf) {
    for (const TrigScalar* s : fields) {
      offsets_.push_back(coeff_.size());
      for (const auto& [f, c] : s->terms()) {
        coeff_.push_back(c);
        for (int r = 0; r < dims_; ++r) {
          tables_.emplace_back(M_);
          auto& row = tables_.back();
          for (int g = 0; g < M_; ++g)
            row[g] = std::exp(kTwoPi * kI *
                              Cplx(static_cast<double>(f[r].first) * g / M_, 0.0));
        }
      }
    }
    offsets_.push_back(coeff_.size());
    fac_.assign(dims_ + 1, std::vector<Cplx>(coeff_.size(), Cplx{1.0, 0.0}));
    row_.assign(dims_, std::vector<Cplx>(M_));
    scratch_.resize(coeff_.size());
    values_.resize(fields.size());
  }

  Cplx mean() {
    Cplx total = rec(0);
    double nodes = std::pow(static_cast<double>(M_), dims_);
    return total / nodes;
  }

 private:
  Cplx rec(int r) {
    if (r == dims_) {
      const auto& fac = fac_[dims_];
      for (size_t t = 0; t < coeff_.size(); ++t) scratch_[t] = fac[t] * coeff_[t];
      for (size_t f = 0; f + 1 < offsets_.size(); ++f)
        values_[f] = lefschetz::pairwise_sum(scratch_.data() + offsets_[f],
                                       offsets_[f + 1] - offsets_[f]);
      return leaf_fn_(values_);
    }
    for (int g = 0; g < M_; ++g) {
      for (size_t t = 0; t < coeff_.size(); ++t)
        fac_[r + 1][t] = fac_[r][t] * tables_[t * dims_ + r][g];
      row_[r][g] = rec(r + 1);
    }
    return lefschetz::pairwise_sum(row_[r].data(), row_[r].size());
  }

  int dims_, M_;
  const Leaf& leaf_fn_;
  std::vector<Cplx> coeff_;
  std::vector<std::vector<Cplx>> tables_;
  std::vector<size_t> offsets_;
  std::vector<std::vector<Cplx>> fac_;
  std::vector<std::vector<Cplx>> row_;
  std::vector<Cplx> scratch_;
  std::vector<Cplx> values_;
};

Integral refine_to_tolerance(const std::vector<const TrigScalar*>& fields, const Leaf& leaf,
                             int dims, long fmax, const QuadratureOptions& opts) {
  int cap = opts.max_grid > 0 ? opts.max_grid : default_grid_cap();
  int M = opts.initial_grid;
  while (M <= fmax) M *= 2;  // resolve the polynomial spectrum before refining

  Cplx prev = GridSum(fields, leaf, dims, M).mean();
  while (true) {
    if (2 * M > cap) {
      throw std::runtime_error(
          "cell quadrature did not converge below tolerance within " +
          std::to_string(cap) + " points per dimension (set LEFSCHETZ_LAB_MAX_GRID "
          "to raise the cap)");
    }
    M *= 2;
    Cplx next = GridSum(fields, leaf, dims, M).mean();
    if (std::abs(next - prev) < opts.tol) return {next, M};
    prev = next;
  }
}

}  // namespace

Integral integrate_cell(const TrigScalar& f, const TrigScalar* weight_phi,
                        const QuadratureOptions& opts) {
  if (!f.is_periodic() || (weight_phi && !weight_phi->is_periodic()))
    throw std::domain_error("grid quadrature requires periodic fields");
  if (f.terms().empty()) return {Cplx{}, 0};
  long fmax = f.max_abs_freq() + (weight_phi ? weight_phi->max_abs_freq() : 0);
  std::vector<const TrigScalar*> fields{&f};
  if (weight_phi) fields.push_back(weight_phi);
  Leaf leaf = weight_phi
                  ? Leaf([](const std::vector<Cplx>& v) { return v[0] * std::exp(-v[1]); })
                  : Leaf([](const std::vector<Cplx>& v) { return v[0]; });
  return refine_to_tolerance(fields, leaf, 2 * f.dim(), fmax, opts);
}

Integral integrate_node_function(int n, const std::vector<const TrigScalar*>& fields,
                                 const std::function<Cplx(const std::vector<Cplx>&)>& leaf,
                                 const QuadratureOptions& opts) {
  long fmax = 0;
  for (const TrigScalar* s : fields) {
    if (!s->is_periodic())
      throw std::domain_error("grid quadrature requires periodic fields");
    fmax = std::max(fmax, s->max_abs_freq());
  }
  return refine_to_tolerance(fields, leaf, 2 * n, fmax, opts);
}

InnerProduct inner_product_detail(const TrigFormField& u, const TrigFormField& v,
                                  const SmoothPeriodicWeight& w, double omega_scale,
                                  const QuadratureOptions& opts) {
  if (u.n != v.n) throw std::invalid_argument("inner_product: dimension mismatch");
  if (u.p != v.p || u.q != v.q) return {Cplx{}, 0};  // pointwise orthogonal
  TrigScalar density(u.n);
  for (const auto& [k, s] : u.comps) {
    const TrigScalar* other = v.comp(k.first, k.second);
    if (other) density = density + s * other->conj();
  }
  const TrigScalar* phi = w.is_trivial() ? nullptr : &w.phi();
  Integral cell = integrate_cell(density, phi, opts);
  double vol = std::pow(2.0, u.n);  // dV = 2ⁿ·dLebesgue
  double scale = std::pow(omega_scale, u.n - u.p - u.q);
  return {cell.value * vol * scale, cell.grid};
}

Cplx inner_product(const TrigFormField& u, const TrigFormField& v,
                   const SmoothPeriodicWeight& w, double omega_scale) {
  return inner_product_detail(u, v, w, omega_scale).value;
}

double norm_squared(const TrigFormField& u, const SmoothPeriodicWeight& w,
                    double omega_scale) {
  return inner_product(u, u, w, omega_scale).real();
}

double norm(const TrigFormField& u, const SmoothPeriodicWeight& w, double omega_scale) {
  return std::sqrt(std::max(0.0, norm_squared(u, w, omega_scale)));
}

double cell_norm_squared(const TrigFormField& u) {
  double total = 0.0;
  for (const auto& [k, s] : u.comps)
    total += (s * s.conj()).cell_integral().real();
  return total * std::pow(2.0, u.n);
}

Integral integrate_top(const TrigFormField& f, const SmoothPeriodicWeight& w,
                       const QuadratureOptions& opts) {
  if (f.p != f.n || f.q != f.n)
    throw std::invalid_argument("integrate_top: need an (n,n) field");
  Mask full = (Mask{1} << f.n) - 1;
  const TrigScalar* g = f.comp(full, full);
  if (!g) return {Cplx{}, 0};
  const TrigScalar* phi = w.is_trivial() ? nullptr : &w.phi();
  Integral cell = integrate_cell(*g, phi, opts);
  // dz_{1..n}∧dz̄_{1..n} = (−1)^{n(n−1)/2}(−i)ⁿ dV with dV = 2ⁿ dLebesgue.
  Cplx unit = std::pow(Cplx{0.0, -1.0}, f.n);
  if ((f.n * (f.n - 1) / 2) & 1) unit = -unit;
  return {cell.value * unit * std::pow(2.0, f.n), cell.grid};
}

// --- serialization --------------------------------------------------------

nlohmann::ordered_json field_to_json(const TrigFormField& u) {
  if (!u.is_periodic())
    throw std::domain_error("serialization supports periodic fields only");
  nlohmann::ordered_json j;
  j["bidegree"] = {u.p, u.q};
  j["cutoff"] = u.max_abs_freq();
  auto terms = nlohmann::ordered_json::array();
  for (const auto& [k, s] : u.comps) {
    for (const auto& [f, c] : s.terms()) {
      nlohmann::ordered_json t;
      t["I"] = alg::indices_from_mask(k.first);
      t["J"] = alg::indices_from_mask(k.second);
      std::vector<long> freq;
      for (const auto& kr : f) freq.push_back(kr.first);
      t["freq"] = freq;
      t["re"] = c.real();
      t["im"] = c.imag();
      terms.push_back(std::move(t));
    }
  }
  j["terms"] = std::move(terms);
  return j;
}

TrigFormField field_from_json(const nlohmann::json& j, int n) {
  int p = j.at("bidegree").at(0).get<int>();
  int q = j.at("bidegree").at(1).get<int>();
  TrigFormField out(n, p, q);
  for (const auto& t : j.at("terms")) {
    Mask I = alg::mask_from_indices(t.at("I").get<std::vector<int>>());
    Mask J = alg::mask_from_indices(t.at("J").get<std::vector<int>>());
    std::vector<long> freq = t.at("freq").get<std::vector<long>>();
    Cplx c{t.at("re").get<double>(), t.at("im").get<double>()};
    out.add_comp(I, J, TrigScalar::periodic_mode(n, freq, c));
  }
  return out;
}

}  // namespace lefschetz::fourier
