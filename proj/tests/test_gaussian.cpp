#include <cmath>
#include <functional>

#include "doctest.h"
#include "eot/error.hpp"
#include "eot/gaussian.hpp"
#include "eot/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using eot::errc;

TEST_CASE("sym_eig solves the pinned 2x2 and reconstructs random inputs") {
  Eigen::MatrixXd S(2, 2);
  S << 2, 1, 1, 2;
  const eot::SymEig e = eot::sym_eig(S);
  CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(e.values[1] == doctest::Approx(1.0).epsilon(1e-13));
  const Eigen::MatrixXd R = e.vectors * e.values.asDiagonal() * e.vectors.transpose();
  CHECK((R - S).cwiseAbs().maxCoeff() <= 1e-10 * S.cwiseAbs().maxCoeff());

  eot::SplitMix64 gen(21);
  for (int d : {1, 3, 7, 12}) {
    const Eigen::MatrixXd A = testutil::random_spd(gen, d, -2.0, 5.0);
    const eot::SymEig ea = eot::sym_eig(A);
    for (int i = 1; i < d; ++i) CHECK(ea.values[i - 1] >= ea.values[i]);
    const Eigen::MatrixXd Ra = ea.vectors * ea.values.asDiagonal() * ea.vectors.transpose();
    CHECK((Ra - A).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, A.cwiseAbs().maxCoeff()));
    const Eigen::MatrixXd G = ea.vectors.transpose() * ea.vectors;
    CHECK((G - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  const eot::SymEig empty = eot::sym_eig(Eigen::MatrixXd(0, 0));
  CHECK(empty.values.size() == 0);

  Eigen::MatrixXd diag = Eigen::Vector3d(1.0, 5.0, -2.0).asDiagonal();
  const eot::SymEig ed = eot::sym_eig(diag);
  CHECK(ed.values[0] == 5.0);
  CHECK(ed.values[1] == 1.0);
  CHECK(ed.values[2] == -2.0);

  Eigen::MatrixXd asym(2, 2);
  asym << 0, 1, 0, 0;
  bool caught = false;
  try {
    eot::sym_eig(asym);
  } catch (const eot::error& e2) {
    caught = e2.code == errc::not_symmetric;
  }
  CHECK(caught);
}

TEST_CASE("sym_sqrt squares back and rejects indefinite input") {
  Eigen::MatrixXd D = Eigen::Vector2d(4.0, 9.0).asDiagonal();
  const Eigen::MatrixXd R = eot::sym_sqrt(D);
  CHECK(R(0, 0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(R(1, 1) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(std::abs(R(0, 1)) <= 1e-13);

  eot::SplitMix64 gen(22);
  for (int d : {2, 5, 20}) {
    const Eigen::MatrixXd S = testutil::random_spd(gen, d, 0.01, 4.0);
    const Eigen::MatrixXd H = eot::sym_sqrt(S);
    CHECK((H * H - S).cwiseAbs().maxCoeff() <= 1e-9 * std::max(1.0, S.cwiseAbs().maxCoeff()));
    CHECK((H - H.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }

  bool caught = false;
  try {
    eot::sym_sqrt(Eigen::Vector2d(1.0, -1.0).asDiagonal());
  } catch (const eot::error& e) {
    caught = e.code == errc::not_psd;
  }
  CHECK(caught);
}

TEST_CASE("entropic Bures matches the frozen scalar instance") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const double got = eot::bures_eps(one, one, 2.0);
  const double expr = (2.0 - std::sqrt(5.0)) + std::log(std::sqrt(5.0) + 1.0) +
                      (1.0 - std::log(2.0));
  CHECK(expr == doctest::Approx(1.2451438475598136).epsilon(1e-14));
  CHECK(got == doctest::Approx(expr).epsilon(1e-12));
}

TEST_CASE("entropic Bures against a zero covariance reduces to the trace") {
  eot::SplitMix64 gen(23);
  for (int d : {1, 2, 4}) {
    const Eigen::MatrixXd S = testutil::random_spd(gen, d, 0.1, 3.0);
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(d, d);
    for (double eps : {0.5, 1.0, 2.0}) {
      CHECK(eot::bures_eps(S, Z, eps) == doctest::Approx(S.trace()).epsilon(1e-10));
      // Written out, the D matrix is (eps/2) I and the scalar terms cancel.
      const double formula = S.trace() - d * eps / 2.0 + 0.5 * eps * d * std::log(eps) +
                             d * 0.5 * eps * (1.0 - std::log(eps));
      CHECK(eot::bures_eps(S, Z, eps) == doctest::Approx(formula).epsilon(1e-10));
      CHECK(eot::bures_eps(Z, S, eps) == doctest::Approx(S.trace()).epsilon(1e-10));
    }
  }
  CHECK(eot::bures_eps(Eigen::MatrixXd(0, 0), Eigen::MatrixXd(0, 0), 1.0) == 0.0);
}

TEST_CASE("entropic Bures is symmetric and matches the scalar closed form") {
  eot::SplitMix64 gen(24);
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + static_cast<int>(gen.next_u64() % 4);
    const Eigen::MatrixXd S1 = testutil::random_spd(gen, d, 0.05, 2.0);
    const Eigen::MatrixXd S2 = testutil::random_spd(gen, d, 0.05, 2.0);
    const double eps = gen.uniform(0.3, 3.0);
    const double ab = eot::bures_eps(S1, S2, eps);
    const double ba = eot::bures_eps(S2, S1, eps);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
  }
  for (int t = 0; t < 30; ++t) {
    Eigen::MatrixXd s1(1, 1), s2(1, 1);
    s1 << gen.uniform(0.01, 3.0);
    s2 << gen.uniform(0.01, 3.0);
    const double eps = gen.uniform(0.2, 4.0);
    const double lib = eot::bures_eps(s1, s2, eps);
    const double ref = oracle::gaussian_eot_scalar(0.0, s1(0, 0), 0.0, s2(0, 0), eps);
    CHECK(lib == doctest::Approx(ref).epsilon(1e-11));
  }
}

TEST_CASE("gaussian_eot adds the mean separation exactly") {
  eot::SplitMix64 gen(25);
  for (int t = 0; t < 10; ++t) {
    const int d = 1 + static_cast<int>(gen.next_u64() % 3);
    Eigen::VectorXd m1(d), m2(d);
    for (int k = 0; k < d; ++k) {
      m1[k] = gen.uniform(-2, 2);
      m2[k] = gen.uniform(-2, 2);
    }
    const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(d, d);
    const double eps = gen.uniform(0.3, 2.0);
    // Point masses: the covariance part vanishes for every temperature.
    CHECK(eot::gaussian_eot(m1, Z, m2, Z, eps) ==
          doctest::Approx((m1 - m2).squaredNorm()).epsilon(1e-12));
    const Eigen::MatrixXd S1 = testutil::random_spd(gen, d, 0.05, 1.0);
    const Eigen::MatrixXd S2 = testutil::random_spd(gen, d, 0.05, 1.0);
    CHECK(eot::gaussian_eot(m1, S1, m2, S2, eps) ==
          doctest::Approx((m1 - m2).squaredNorm() + eot::bures_eps(S1, S2, eps)).epsilon(1e-12));
  }
}

TEST_CASE("lca identity holds for full-rank, low-rank, and empty factors") {
  eot::SplitMix64 gen(26);

  // s = d: the complement trace cancels and both sides are the same problem.
  for (int t = 0; t < 5; ++t) {
    const int d = 3;
    const Eigen::MatrixXd U = testutil::random_frame(gen, d, d);
    Eigen::VectorXd lam(d);
    for (int i = 0; i < d; ++i) lam[i] = gen.uniform(0.0, 2.0);
    const Eigen::MatrixXd S2 = testutil::random_spd(gen, d, 0.05, 2.0);
    const eot::LcaCheck chk = eot::gaussian_lca_check(U, lam, S2, 1.0);
    CHECK(chk.lhs == doctest::Approx(chk.rhs).epsilon(1e-8));
  }

  // Low-rank: d = 5 against a rank-2 factor.
  for (int t = 0; t < 10; ++t) {
    const Eigen::MatrixXd U = testutil::random_frame(gen, 5, 2);
    Eigen::VectorXd lam(2);
    lam << gen.uniform(0.1, 2.0), gen.uniform(0.1, 2.0);
    const Eigen::MatrixXd S2 = testutil::random_spd(gen, 5, 0.05, 2.0);
    const double eps = gen.uniform(0.4, 2.5);
    const eot::LcaCheck chk = eot::gaussian_lca_check(U, lam, S2, eps);
    CHECK(std::abs(chk.lhs - chk.rhs) <= 1e-8 * (1.0 + std::abs(chk.lhs)));
  }

  // s = 0: a zero first covariance leaves exactly tr(S2) on both sides.
  const Eigen::MatrixXd S2 = testutil::random_spd(gen, 4, 0.1, 1.5);
  const eot::LcaCheck zero =
      eot::gaussian_lca_check(Eigen::MatrixXd(4, 0), Eigen::VectorXd(0), S2, 1.3);
  CHECK(zero.lhs == doctest::Approx(S2.trace()).epsilon(1e-10));
  CHECK(zero.rhs == doctest::Approx(S2.trace()).epsilon(1e-10));

  bool caught = false;
  try {
    eot::gaussian_lca_check(2.0 * testutil::random_frame(gen, 4, 2), Eigen::VectorXd::Ones(2), S2,
                            1.0);
  } catch (const eot::error& e) {
    caught = e.code == errc::not_orthogonal;
  }
  CHECK(caught);
  caught = false;
  try {
    eot::gaussian_lca_check(testutil::random_frame(gen, 4, 2), -Eigen::VectorXd::Ones(2), S2, 1.0);
  } catch (const eot::error& e) {
    caught = e.code == errc::not_psd;
  }
  CHECK(caught);
}
