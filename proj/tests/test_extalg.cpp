#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include "doctest.h"
#include "lefschetz/extalg.hpp"
#include "lefschetz/extalg_json.hpp"

using namespace lefschetz;
using namespace lefschetz::alg;

namespace {

// ---------------------------------------------------------------------------
// Oracle 1: expanded tensor representation.  A form is a list of words over
// letters (dz_1..dz_n, dz̄_1..dz̄_n); wedge is concatenation and the canonical
// coefficient is obtained by bubble-sorting the word while counting swaps.
// Independent of the bitmask algebra.

struct WordForm {
  std::map<std::vector<int>, Cplx> words;  // letter: j = dz_j, n+j = dz̄_j

  void add(std::vector<int> w, Cplx c) {
    // canonicalize
    int sign = 1;
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        if (w[i] == w[i + 1]) return;  // nilpotent
        if (w[i] > w[i + 1]) {
          std::swap(w[i], w[i + 1]);
          sign = -sign;
          changed = true;
        }
      }
    }
    auto& slot = words[w];
    slot += static_cast<double>(sign) * c;
    if (slot == Cplx{0, 0}) words.erase(w);
  }
};

WordForm to_words(const BigradedForm<Cplx>& u) {
  WordForm out;
  for (const auto& [k, c] : u.terms) {
    std::vector<int> w;
    for (int j : indices_from_mask(k.first)) w.push_back(j);
    for (int j : indices_from_mask(k.second)) w.push_back(u.n + j);
    out.add(w, c);
  }
  return out;
}

WordForm wedge_words(const WordForm& a, const WordForm& b) {
  WordForm out;
  for (const auto& [wa, ca] : a.words)
    for (const auto& [wb, cb] : b.words) {
      std::vector<int> w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      out.add(w, ca * cb);
    }
  return out;
}

bool words_equal(const WordForm& a, const WordForm& b, double tol) {
  std::map<std::vector<int>, Cplx> diff = a.words;
  for (const auto& [w, c] : b.words) diff[w] -= c;
  for (const auto& [w, c] : diff)
    if (std::abs(c) > tol) return false;
  return true;
}

BigradedForm<Cplx> random_form(int n, int p, int q, std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BigradedForm<Cplx> u(n, p, q);
  for (Mask I : masks_of_weight(n, p))
    for (Mask J : masks_of_weight(n, q)) u.add(I, J, Cplx(dist(rng), dist(rng)));
  return u;
}

BigradedForm<GaussianRational> random_rational_form(int n, int p, int q, std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-6, 6);
  std::uniform_int_distribution<int> den(1, 5);
  BigradedForm<GaussianRational> u(n, p, q);
  for (Mask I : masks_of_weight(n, p))
    for (Mask J : masks_of_weight(n, q))
      u.add(I, J, GaussianRational(Rational(num(rng), den(rng)), Rational(num(rng), den(rng))));
  return u;
}

// Oracle 2 helper: matrix of a linear map between monomial bases.
template <class Op>
Eigen::MatrixXcd operator_matrix(int n, int p, int q, int dp, int dq, Op&& op) {
  auto dom_I = masks_of_weight(n, p), dom_J = masks_of_weight(n, q);
  auto cod_I = masks_of_weight(n, p + dp), cod_J = masks_of_weight(n, q + dq);
  auto index_of = [](const std::vector<Mask>& v, Mask m) {
    return static_cast<int>(std::find(v.begin(), v.end(), m) - v.begin());
  };
  Eigen::MatrixXcd M(cod_I.size() * cod_J.size(), dom_I.size() * dom_J.size());
  M.setZero();
  int col = 0;
  for (Mask I : dom_I)
    for (Mask J : dom_J) {
      BigradedForm<Cplx> img = op(BigradedForm<Cplx>::monomial(n, I, J, {1, 0}));
      for (const auto& [k, c] : img.terms) {
        int row = index_of(cod_I, k.first) * static_cast<int>(cod_J.size()) +
                  index_of(cod_J, k.second);
        M(row, col) = c;
      }
      ++col;
    }
  return M;
}

Eigen::VectorXcd form_vector(const BigradedForm<Cplx>& u) {
  auto Is = masks_of_weight(u.n, u.p), Js = masks_of_weight(u.n, u.q);
  Eigen::VectorXcd v(Is.size() * Js.size());
  int i = 0;
  for (Mask I : Is)
    for (Mask J : Js) v(i++) = u.coefficient(I, J);
  return v;
}

double form_distance(const BigradedForm<Cplx>& a, const BigradedForm<Cplx>& b) {
  BigradedForm<Cplx> d = a - b;
  return max_coeff_abs(d);
}

const Mask M1 = 1, M2 = 2, M12 = 3;

}  // namespace

TEST_CASE("wedge matches the expanded tensor oracle on random forms") {
  std::mt19937 rng(20260826);
  for (int n = 1; n <= 4; ++n)
    for (int trial = 0; trial < 30; ++trial) {
      std::uniform_int_distribution<int> deg(0, n);
      int p1 = deg(rng), q1 = deg(rng), p2 = deg(rng), q2 = deg(rng);
      if (p1 + p2 > n || q1 + q2 > n) continue;
      auto u = random_form(n, p1, q1, rng), v = random_form(n, p2, q2, rng);
      auto algebra = to_words(wedge(u, v));
      auto oracle = wedge_words(to_words(u), to_words(v));
      CHECK(words_equal(algebra, oracle, 1e-14));
    }
}

TEST_CASE("wedge basis cases") {
  int n = 2;
  auto dz1 = BigradedForm<Cplx>::monomial(n, M1, 0, {1, 0});
  auto dz2 = BigradedForm<Cplx>::monomial(n, M2, 0, {1, 0});

  auto w = wedge(dz1, dz2);
  CHECK(w.coefficient(M12, 0) == Cplx{1, 0});

  CHECK(wedge(dz1, dz1).is_zero());

  // (dz2∧dz̄1)∧dz1: sorting dz2,dz̄1,dz1 → dz1,dz2,dz̄1 is a 3-cycle (even),
  // so the canonical coefficient is +1; confirmed by the tensor oracle.
  auto u = BigradedForm<Cplx>::monomial(n, M2, M1, {1, 0});
  auto prod = wedge(u, dz1);
  CHECK(prod.coefficient(M12, M1) == Cplx{1, 0});
  CHECK(words_equal(to_words(prod), wedge_words(to_words(u), to_words(dz1)), 0.0));
}

TEST_CASE("wedge graded commutativity and degree overflow error") {
  std::mt19937 rng(7);
  auto u = random_form(3, 1, 1, rng), v = random_form(3, 2, 1, rng);
  auto uv = wedge(u, v), vu = wedge(v, u);
  int sign = ((u.p + u.q) * (v.p + v.q)) % 2 ? -1 : 1;
  CHECK(form_distance(uv, vu.scaled(Cplx(sign, 0))) < 1e-14);

  auto top = random_form(2, 2, 2, rng);
  CHECK_THROWS_WITH_AS(wedge(top, random_form(2, 1, 0, rng)),
                       doctest::Contains("(3,2)"), std::invalid_argument);
}

TEST_CASE("contract basis cases and antiderivation property") {
  int n = 2;
  auto dz12 = BigradedForm<Cplx>::monomial(n, M12, 0, {1, 0});
  std::vector<Cplx> e1 = {{1, 0}, {0, 0}}, e2 = {{0, 0}, {1, 0}};

  auto r1 = contract(e1, dz12);
  CHECK(r1.coefficient(M2, 0) == Cplx{1, 0});
  auto r2 = contract(e2, dz12);
  CHECK(r2.coefficient(M1, 0) == Cplx{-1, 0});

  CHECK_THROWS_AS(contract(e1, BigradedForm<Cplx>::monomial(n, 0, M1, {1, 0})),
                  std::invalid_argument);

  std::mt19937 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    int nn = 3;
    auto u = random_form(nn, 1, 1, rng), v = random_form(nn, 1, 1, rng);
    std::vector<Cplx> xi = {{0.3, 0.1}, {-0.7, 0.2}, {0.5, -0.4}};
    auto lhs = contract(xi, wedge(u, v));
    auto rhs = wedge(contract(xi, u), v) + wedge(u, contract(xi, v));  // (−1)^{deg u} = +1
    CHECK(form_distance(lhs, rhs) < 1e-14);
  }
}

TEST_CASE("contract sends the quotient-dual 1-form kernel to zero exactly") {
  // (−f,−g,1)·(1,0,f) = 0: the vertical perturbation of the first frame leg.
  GaussianRational f(Rational(3, 7), Rational(2, 5)), g(Rational(-4, 9), Rational(1, 3));
  BigradedForm<GaussianRational> eta(3, 1, 0);
  eta.add(1, 0, -f);
  eta.add(2, 0, -g);
  eta.add(4, 0, GaussianRational(1));
  std::vector<GaussianRational> xi = {GaussianRational(1), GaussianRational(0), f};
  CHECK(contract(xi, eta).is_zero());
}

TEST_CASE("lefschetz_L and lambda_dual basics") {
  auto frame = HermitianFrame::standard(2);
  BigradedForm<Cplx> one(2, 0, 0);
  one.add(0, 0, {1, 0});
  auto L1 = lefschetz_L(one, frame);
  CHECK(L1.coefficient(M1, M1) == Cplx{0, 1});
  CHECK(L1.coefficient(M2, M2) == Cplx{0, 1});
  CHECK(L1.terms.size() == 2);

  // Λ kills every (p,0)-form.
  std::mt19937 rng(3);
  for (int n = 1; n <= 4; ++n)
    for (int p = 0; p <= n; ++p) {
      auto alpha = random_form(n, p, 0, rng);
      CHECK(lambda_dual(alpha, HermitianFrame::standard(n)).is_zero());
    }
}

TEST_CASE("lambda_dual equals the dense matrix adjoint of L") {
  std::mt19937 rng(17);
  for (int n = 1; n <= 3; ++n) {
    auto frame = HermitianFrame::standard(n);
    for (int p = 1; p <= n; ++p)
      for (int q = 1; q <= n; ++q) {
        Eigen::MatrixXcd L =
            operator_matrix(n, p - 1, q - 1, 1, 1,
                            [&](const BigradedForm<Cplx>& m) { return lefschetz_L(m, frame); });
        auto u = random_form(n, p, q, rng);
        Eigen::VectorXcd expected = L.adjoint() * form_vector(u);
        Eigen::VectorXcd got = form_vector(lambda_dual(u, frame));
        CHECK((expected - got).cwiseAbs().maxCoeff() < 1e-13);
      }
  }
}

TEST_CASE("Kahler commutation [L,Lambda] = (p+q-n)·id exactly over Gaussian rationals") {
  for (int n = 1; n <= 4; ++n) {
    auto frame = HermitianFrame::standard(n);
    for (int p = 0; p <= n; ++p)
      for (int q = 0; q <= n; ++q)
        for (Mask I : masks_of_weight(n, p))
          for (Mask J : masks_of_weight(n, q)) {
            auto u = BigradedForm<GaussianRational>::monomial(n, I, J, GaussianRational(1));
            auto comm =
                lefschetz_L(lambda_dual(u, frame), frame) - lambda_dual(lefschetz_L(u, frame), frame);
            CHECK((comm - u.scaled(GaussianRational(p + q - n))).is_zero());
          }
  }
}

TEST_CASE("lefschetz_inverse identity, dense-solve pin, and round trips") {
  std::mt19937 rng(23);

  // q = 0: β = dz_1..n is its own preimage.
  for (int n = 1; n <= 4; ++n) {
    auto frame = HermitianFrame::standard(n);
    Mask full = (Mask{1} << n) - 1;
    auto beta = BigradedForm<Cplx>::monomial(n, full, 0, {0.7, -0.3});
    CHECK(form_distance(lefschetz_inverse(beta, frame), beta) == 0.0);
  }

  // n = 2, q = 2: ω²∧α = β — the dense solve gives α = c/2 (frozen).
  {
    auto frame = HermitianFrame::standard(2);
    Cplx c{1.2, 0.4};
    auto beta = BigradedForm<Cplx>::monomial(2, M12, M12, c);
    auto alpha = lefschetz_inverse(beta, frame);
    CHECK(std::abs(alpha.coefficient(0, 0) - c / 2.0) < 1e-15);

    Eigen::MatrixXcd M = operator_matrix(2, 0, 0, 2, 2, [&](const BigradedForm<Cplx>& m) {
      return wedge(omega_power<Cplx>(2, 2), m);
    });
    Eigen::VectorXcd sol = M.colPivHouseholderQr().solve(form_vector(beta));
    CHECK(std::abs(sol(0) - alpha.coefficient(0, 0)) < 1e-14);
  }

  // n = 3, q = 1: random β against the least-squares oracle, and round trip.
  {
    int n = 3, q = 1;
    auto frame = HermitianFrame::standard(n);
    Eigen::MatrixXcd M = operator_matrix(n, n - q, 0, q, q, [&](const BigradedForm<Cplx>& m) {
      return wedge(omega_power<Cplx>(n, q), m);
    });
    for (int trial = 0; trial < 10; ++trial) {
      auto beta = random_form(n, n, q, rng);
      auto alpha = lefschetz_inverse(beta, frame);
      Eigen::VectorXcd ls = M.completeOrthogonalDecomposition().solve(form_vector(beta));
      CHECK((ls - form_vector(alpha)).cwiseAbs().maxCoeff() < 1e-12);
      auto round = wedge(omega_power<Cplx>(n, q), alpha);
      CHECK(form_distance(round, beta) < 1e-12);
    }
  }

  // Exact round trip over rationals, every q, n ≤ 4.
  std::mt19937 rng2(29);
  for (int n = 1; n <= 4; ++n)
    for (int q = 1; q <= n; ++q)
      for (int trial = 0; trial < 5; ++trial) {
        auto beta = random_rational_form(n, n, q, rng2);
        auto frame = HermitianFrame::standard(n);
        auto alpha = lefschetz_inverse(beta, frame);
        auto round = wedge(omega_power<GaussianRational>(n, q), alpha);
        CHECK((round - beta).is_zero());
      }
}

TEST_CASE("pairing basics, metric scaling, conjugate symmetry") {
  auto frame0 = HermitianFrame::standard(2, 0.0);
  auto dz1 = BigradedForm<Cplx>::monomial(2, M1, 0, {1, 0});
  auto p0 = pairing(dz1, dz1, frame0);
  CHECK(p0.coefficient(M1, M1) == Cplx{0, 1});  // i·dz1∧dz̄1

  auto frame4 = HermitianFrame::standard(2, std::log(4.0));
  auto p4 = pairing(dz1, dz1, frame4);
  CHECK(std::abs(p4.coefficient(M1, M1) - Cplx{0, 0.25}) < 1e-15);

  // {u,v} = (−1)^{deg u·deg v + 1} · conj({v,u}) coefficientwise.
  std::mt19937 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<int> deg(0, 1);
    int p1 = deg(rng), q1 = deg(rng), p2 = deg(rng), q2 = deg(rng);
    if (p1 + q2 > 2 || q1 + p2 > 2 || p1 + p2 > 2 || q1 + q2 > 2) continue;
    auto u = random_form(2, p1, q1, rng), v = random_form(2, p2, q2, rng);
    auto uv = pairing(u, v, frame0);
    auto vu = pairing(v, u, frame0);
    int sign = ((p1 + q1) * (p2 + q2) + 1) % 2 ? -1 : 1;
    CHECK(form_distance(uv, conj_form(vu).scaled(Cplx(sign, 0))) < 1e-14);
  }
}

TEST_CASE("bochner_weight arithmetic") {
  CHECK(bochner_weight({1, 2}, CurvatureSpectrum({0, 0, 0})) == 0.0);
  CHECK(bochner_weight({2, 3}, CurvatureSpectrum({-1, 2, 5})) == 7.0);

  std::mt19937 rng(37);
  std::uniform_real_distribution<double> pos(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> l = {pos(rng), pos(rng), pos(rng)};
    std::sort(l.begin(), l.end());
    CurvatureSpectrum spec(l);
    for (const std::vector<int>& J :
         std::vector<std::vector<int>>{{1}, {2}, {3}, {1, 2}, {1, 3}, {2, 3}, {1, 2, 3}})
      CHECK(bochner_weight(J, spec) >= 0.0);
  }
  CHECK_THROWS_AS(bochner_weight({2, 1}, CurvatureSpectrum({0, 0})), std::invalid_argument);
  CHECK_THROWS_AS(CurvatureSpectrum({2, 1}), std::invalid_argument);
}

TEST_CASE("non-orthonormal frame: L_omega adjoint and inverse round trip") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (int n = 2; n <= 3; ++n) {
    // random Hermitian positive definite ω = I + A·A†/2
    Eigen::MatrixXcd A(n, n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) A(j, k) = Cplx(dist(rng), dist(rng));
    Eigen::MatrixXcd W = Eigen::MatrixXcd::Identity(n, n) + 0.5 * A * A.adjoint();
    HermitianFrame frame;
    frame.n = n;
    frame.omega.resize(n * n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) frame.omega[j * n + k] = W(j, k);

    // ω-inner product via the triangular coframe change, used as the oracle.
    Eigen::LLT<Eigen::MatrixXcd> llt(W.conjugate());
    Eigen::MatrixXcd T = llt.matrixL().adjoint();
    Eigen::MatrixXcd Tinv = T.inverse();
    std::vector<Cplx> tinv(n * n);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) tinv[j * n + k] = Tinv(j, k);
    auto ip = [&](const BigradedForm<Cplx>& a, const BigradedForm<Cplx>& b) {
      auto ea = change_coframe(a, tinv), eb = change_coframe(b, tinv);
      Cplx acc{0, 0};
      for (const auto& [k, c] : ea.terms) acc += c * std::conj(eb.coefficient(k.first, k.second));
      return acc;
    };

    for (int trial = 0; trial < 8; ++trial) {
      auto u = random_form(n, 1, 1, rng);
      auto w = random_form(n, 0, 0, rng);
      Cplx lhs = ip(lambda_dual(u, frame), w);
      Cplx rhs = ip(u, lefschetz_L(w, frame));
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }

    for (int q = 1; q <= n; ++q) {
      auto beta = random_form(n, n, q, rng);
      auto alpha = lefschetz_inverse(beta, frame);
      BigradedForm<Cplx> round = alpha;
      for (int s = 0; s < q; ++s) round = lefschetz_L(round, frame);
      CHECK(form_distance(round, beta) < 1e-10);
    }
  }
}

TEST_CASE("json serialization round trip") {
  std::mt19937 rng(43);
  auto u = random_form(3, 2, 1, rng);
  auto j = form_to_json(u);
  CHECK(j["p"] == 2);
  CHECK(j["q"] == 1);
  auto back = form_from_json(j);
  CHECK(form_distance(u, back) == 0.0);
}
