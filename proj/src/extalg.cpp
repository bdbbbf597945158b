#include "lefschetz/extalg.hpp"

#include <Eigen/Dense>

#include "json.hpp"
#include "lefschetz/extalg_json.hpp"

namespace lefschetz::alg {

double bochner_weight(const std::vector<int>& J, const CurvatureSpectrum& spectrum) {
  double acc = 0;
  int prev = 0;
  for (int j : J) {
    if (j <= prev || j > static_cast<int>(spectrum.lambdas.size()))
      throw std::invalid_argument("bochner_weight: J must be strictly increasing with entries <= n");
    acc += spectrum.lambdas[j - 1];
    prev = j;
  }
  return acc;
}

namespace {

Eigen::MatrixXcd omega_matrix(const HermitianFrame& frame) {
  Eigen::MatrixXcd m(frame.n, frame.n);
  for (int j = 0; j < frame.n; ++j)
    for (int k = 0; k < frame.n; ++k)
      m(j, k) = frame.omega.empty() ? Cplx(j == k ? 1.0 : 0.0, 0.0) : frame.omega[j * frame.n + k];
  return m;
}

// Upper-triangular T with T^†T = conj(ω); the coframe ε = T·dz is then
// orthonormal (ω = i Σ ε_k∧ε̄_k).  Returns (T, T⁻¹) as row-major vectors.
std::pair<std::vector<Cplx>, std::vector<Cplx>> coframe_factor(const HermitianFrame& frame) {
  Eigen::MatrixXcd w = omega_matrix(frame);
  if (!w.isApprox(w.adjoint(), 1e-12))
    throw std::invalid_argument("HermitianFrame: omega is not Hermitian");
  Eigen::LLT<Eigen::MatrixXcd> llt(w.conjugate());
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("HermitianFrame: omega is not positive definite");
  Eigen::MatrixXcd T = llt.matrixL().adjoint();
  Eigen::MatrixXcd Tinv = T.inverse();
  int n = frame.n;
  std::vector<Cplx> t(n * n), tinv(n * n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      t[j * n + k] = T(j, k);
      tinv[j * n + k] = Tinv(j, k);
    }
  return {t, tinv};
}

}  // namespace

BigradedForm<Cplx> lefschetz_L(const BigradedForm<Cplx>& u, const HermitianFrame& frame) {
  if (frame.orthonormal()) return lefschetz_L_orthonormal(u);
  std::vector<Cplx> w(frame.omega);
  return one_one_wedge(w, u);
}

BigradedForm<Cplx> lambda_dual(const BigradedForm<Cplx>& u, const HermitianFrame& frame) {
  if (frame.orthonormal()) return lambda_dual_orthonormal(u);
  auto [T, Tinv] = coframe_factor(frame);
  // dz_j = Σ_k (T⁻¹)_{kj}? — express the form in the orthonormal coframe:
  // ε = T dz ⇒ dz = T⁻¹ ε, so substitute rows of T⁻¹ for dz.
  BigradedForm<Cplx> in_eps = change_coframe(u, Tinv);
  BigradedForm<Cplx> lam = lambda_dual_orthonormal(in_eps);
  return change_coframe(lam, T);
}

BigradedForm<Cplx> lefschetz_inverse(const BigradedForm<Cplx>& beta, const HermitianFrame& frame) {
  if (frame.orthonormal()) return lefschetz_inverse_orthonormal(beta);
  auto [T, Tinv] = coframe_factor(frame);
  BigradedForm<Cplx> in_eps = change_coframe(beta, Tinv);
  BigradedForm<Cplx> alpha = lefschetz_inverse_orthonormal(in_eps);
  return change_coframe(alpha, T);
}

BigradedForm<Cplx> pairing(const BigradedForm<Cplx>& u, const BigradedForm<Cplx>& v,
                           const HermitianFrame& frame) {
  return pairing_orthonormal(u, v, frame.weight_value);
}

nlohmann::ordered_json form_to_json(const BigradedForm<Cplx>& u) {
  nlohmann::ordered_json j;
  j["p"] = u.p;
  j["q"] = u.q;
  j["n"] = u.n;
  auto& terms = j["terms"] = nlohmann::ordered_json::array();
  for (const auto& [k, c] : u.terms) {
    nlohmann::ordered_json t;
    t["I"] = indices_from_mask(k.first);
    t["J"] = indices_from_mask(k.second);
    t["re"] = c.real();
    t["im"] = c.imag();
    terms.push_back(std::move(t));
  }
  return j;
}

BigradedForm<Cplx> form_from_json(const nlohmann::json& j) {
  int n = j.value("n", 0);
  BigradedForm<Cplx> u(n, j.at("p").get<int>(), j.at("q").get<int>());
  for (const auto& t : j.at("terms")) {
    Mask I = mask_from_indices(t.at("I").get<std::vector<int>>());
    Mask J = mask_from_indices(t.at("J").get<std::vector<int>>());
    u.add(I, J, Cplx(t.at("re").get<double>(), t.at("im").get<double>()));
  }
  return u;
}

}  // namespace lefschetz::alg
