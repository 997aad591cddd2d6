#include <cmath>
#include <functional>

#include "doctest.h"
#include "eot/cost.hpp"
#include "eot/error.hpp"
#include "eot/rng.hpp"
#include "test_util.hpp"

using eot::errc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

}  // namespace

TEST_CASE("eval_cost matches the pinned pointwise examples") {
  CHECK(eot::eval_cost(eot::sq_euclidean(1.0), vec({0.3, -2.0}), vec({0.3, -2.0})) == 0.0);
  CHECK(eot::eval_cost(eot::l1_cost(0.5), vec({0, 0}), vec({1, 1})) == 1.0);
  CHECK(eot::eval_cost(eot::linf_cost(), vec({0, 0.2}), vec({1, 0.5})) == 1.0);
  const Eigen::MatrixXd A0 = Eigen::MatrixXd::Zero(2, 3);
  CHECK(eot::eval_cost(eot::gw_bilinear(A0), vec({1, 0}), vec({1, 0, 0})) == -4.0);
}

TEST_CASE("gw_bilinear evaluates both terms of the inner cost") {
  Eigen::MatrixXd A(1, 1);
  A << 0.25;
  // -4 x^2 y^2 - 32 A x y at x = 2, y = 3: -4*4*9 - 32*0.25*6 = -144 - 48.
  CHECK(eot::eval_cost(eot::gw_bilinear(A), vec({2}), vec({3})) == doctest::Approx(-192.0));
}

TEST_CASE("cost_matrix is bit-identical to pointwise evaluation") {
  eot::SplitMix64 gen(101);
  const eot::Measure mu = testutil::random_measure(gen, 17, 3);
  const eot::Measure nu = testutil::random_measure(gen, 23, 3);
  for (const eot::CostSpec& spec :
       {eot::sq_euclidean(1.7), eot::l1_cost(0.3), eot::linf_cost()}) {
    const Eigen::MatrixXd C = eot::cost_matrix(spec, mu.points, nu.points);
    REQUIRE(C.rows() == 17);
    REQUIRE(C.cols() == 23);
    for (Eigen::Index i = 0; i < C.rows(); ++i)
      for (Eigen::Index j = 0; j < C.cols(); ++j) {
        const Eigen::VectorXd x = mu.points.row(i).transpose();
        const Eigen::VectorXd y = nu.points.row(j).transpose();
        CHECK(C(i, j) == eot::eval_cost(spec, x, y));
      }
  }
}

TEST_CASE("cost_matrix pinned small cases and symmetry") {
  Eigen::MatrixXd pts(2, 1);
  pts << 0, 1;
  const Eigen::MatrixXd C = eot::cost_matrix(eot::sq_euclidean(1.0), pts, pts);
  CHECK(C(0, 0) == 0.0);
  CHECK(C(0, 1) == 1.0);
  CHECK(C(1, 0) == 1.0);
  CHECK(C(1, 1) == 0.0);
  CHECK((C - C.transpose()).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd one(1, 2);
  one << 0.25, -1;
  const Eigen::MatrixXd C1 = eot::cost_matrix(eot::l1_cost(1.0), one, one);
  CHECK(C1.rows() == 1);
  CHECK(C1(0, 0) == 0.0);
}

TEST_CASE("cost_matrix refuses to exceed the cache budget") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(100, 1);
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(101, 1);
  bool caught = false;
  try {
    eot::cost_matrix(eot::sq_euclidean(), X, Y, 10000);
  } catch (const eot::error& e) {
    caught = e.code == errc::cache_budget_exceeded;
  }
  CHECK(caught);
  CHECK(eot::cost_matrix(eot::sq_euclidean(), X, Y, 10100).size() == 10100);
}

TEST_CASE("decomposable cost splits exactly into head and tail") {
  const auto tail = [](const Eigen::VectorXd& y2) { return y2.squaredNorm() + std::sin(y2[0]); };
  const eot::CostSpec part1 = eot::l1_cost(0.7);
  const eot::CostSpec spec = eot::decomposable(part1, tail, 2);
  eot::SplitMix64 gen(55);
  for (int t = 0; t < 100; ++t) {
    const Eigen::VectorXd x = vec({gen.uniform(-1, 1), gen.uniform(-1, 1)});
    const Eigen::VectorXd y =
        vec({gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(-1, 1)});
    const double whole = eot::eval_cost(spec, x, y);
    const double head = eot::eval_cost(part1, x, y.head(2));
    const double rest = tail(y.tail(2));
    CHECK(whole == head + rest);
  }
}

TEST_CASE("rescale_problem inverts exactly on evaluations") {
  const eot::CostSpec c = eot::sq_euclidean(2.0);
  const auto [same, eps_same] = eot::rescale_problem(c, 1.0, 1.0, 0.0);
  CHECK(eps_same == 1.0);
  CHECK(same.scale == c.scale);
  CHECK(same.shift == c.shift);

  const auto [half, eps_half] = eot::rescale_problem(c, 1.0, 2.0, 0.0);
  CHECK(eps_half == 0.5);
  eot::SplitMix64 gen(77);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd x = vec({gen.uniform(-2, 2)});
    const Eigen::VectorXd y = vec({gen.uniform(-2, 2)});
    CHECK(eot::eval_cost(half, x, y) == doctest::Approx(0.5 * eot::eval_cost(c, x, y)));
  }

  const auto [shifted, eps_s] = eot::rescale_problem(c, 0.7, 3.0, -0.4);
  CHECK(eps_s == doctest::Approx(0.7 / 3.0));
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd x = vec({gen.uniform(-2, 2), gen.uniform(-2, 2)});
    const Eigen::VectorXd y = vec({gen.uniform(-2, 2), gen.uniform(-2, 2)});
    const double direct = eot::eval_cost(c, x, y);
    const double mapped = 3.0 * eot::eval_cost(shifted, x, y) + (-0.4);
    CHECK(mapped == doctest::Approx(direct).epsilon(1e-14));
  }

  bool caught = false;
  try {
    eot::rescale_problem(c, 1.0, 0.0, 0.0);
  } catch (const eot::error& e) {
    caught = e.code == errc::bad_config;
  }
  CHECK(caught);
}

TEST_CASE("eval_cost rejects dimension mismatches") {
  bool caught = false;
  try {
    eot::eval_cost(eot::sq_euclidean(), vec({1, 2}), vec({1}));
  } catch (const eot::error& e) {
    caught = e.code == errc::bad_dimension;
  }
  CHECK(caught);

  Eigen::MatrixXd A(2, 3);
  A.setZero();
  caught = false;
  try {
    eot::eval_cost(eot::gw_bilinear(A), vec({1, 2, 3}), vec({1, 2, 3}));
  } catch (const eot::error& e) {
    caught = e.code == errc::bad_dimension;
  }
  CHECK(caught);
}
