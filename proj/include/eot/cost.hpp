#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <memory>
#include <utility>

#include "eot/error.hpp"

namespace eot {

// Default cap on dense cost matrices (entries, not bytes). Solvers fall back
// to streaming cost rows above it.
inline constexpr Eigen::Index kCostCacheBudget = 16000000;

enum class CostKind { sq_euclidean, l1, l_inf, gw_bilinear, decomposable };

// Immutable description of a ground cost. Evaluation is scale * base(x, y) + shift;
// scale and shift exist on every variant so that rescale_problem can represent
// (c - b) / a uniformly. Cheap to copy and freely shareable.
struct CostSpec {
  CostKind kind = CostKind::sq_euclidean;
  double scale = 1.0;
  double shift = 0.0;
  Eigen::MatrixXd bilinear;                                // gw_bilinear: the s x d matrix A
  std::shared_ptr<const CostSpec> part1;                   // decomposable: cost on (x, y_{<split})
  std::function<double(const Eigen::VectorXd&)> tail;      // decomposable: term on y_{>=split}
  Eigen::Index split = 0;                                  // decomposable: first column of the tail block
};

inline CostSpec sq_euclidean(double scale = 1.0) {
  CostSpec s;
  s.kind = CostKind::sq_euclidean;
  s.scale = scale;
  return s;
}

inline CostSpec l1_cost(double scale = 1.0) {
  CostSpec s;
  s.kind = CostKind::l1;
  s.scale = scale;
  return s;
}

inline CostSpec linf_cost() {
  CostSpec s;
  s.kind = CostKind::l_inf;
  return s;
}

// base(x, y) = -4 |x|^2 |y|^2 - 32 x^T A y, the Gromov-Wasserstein inner cost.
inline CostSpec gw_bilinear(const Eigen::MatrixXd& A) {
  CostSpec s;
  s.kind = CostKind::gw_bilinear;
  s.bilinear = A;
  return s;
}

// base(x, (y1, y2)) = part1(x, y1) + tail(y2), with y split at column `split`.
inline CostSpec decomposable(CostSpec part1, std::function<double(const Eigen::VectorXd&)> tail,
                             Eigen::Index split) {
  require(split >= 0, errc::bad_dimension, "decomposable: split must be nonnegative");
  require(static_cast<bool>(tail), errc::bad_config, "decomposable: tail term missing");
  CostSpec s;
  s.kind = CostKind::decomposable;
  s.part1 = std::make_shared<const CostSpec>(std::move(part1));
  s.tail = std::move(tail);
  s.split = split;
  return s;
}

namespace detail {

// Canonical scalar evaluation. Every cost path in the library (single pairs,
// cached matrices, streamed rows) funnels through this routine, which is what
// makes cost_matrix bit-identical to looping eval_cost.
inline double cost_base(const CostSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y) {
  switch (spec.kind) {
    case CostKind::sq_euclidean: {
      require(x.size() == y.size(), errc::bad_dimension, "sq_euclidean: dimension mismatch");
      double s = 0.0;
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        s += d * d;
      }
      return s;
    }
    case CostKind::l1: {
      require(x.size() == y.size(), errc::bad_dimension, "l1: dimension mismatch");
      double s = 0.0;
      for (Eigen::Index k = 0; k < x.size(); ++k) s += std::abs(x[k] - y[k]);
      return s;
    }
    case CostKind::l_inf: {
      require(x.size() == y.size(), errc::bad_dimension, "l_inf: dimension mismatch");
      double s = 0.0;
      for (Eigen::Index k = 0; k < x.size(); ++k) s = std::max(s, std::abs(x[k] - y[k]));
      return s;
    }
    case CostKind::gw_bilinear: {
      const Eigen::MatrixXd& A = spec.bilinear;
      require(x.size() == A.rows() && y.size() == A.cols(), errc::bad_dimension,
              "gw_bilinear: dimensions do not match A");
      double nx = 0.0, ny = 0.0, bil = 0.0;
      for (Eigen::Index k = 0; k < x.size(); ++k) nx += x[k] * x[k];
      for (Eigen::Index l = 0; l < y.size(); ++l) ny += y[l] * y[l];
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        double row = 0.0;
        for (Eigen::Index l = 0; l < y.size(); ++l) row += A(k, l) * y[l];
        bil += x[k] * row;
      }
      return -4.0 * nx * ny - 32.0 * bil;
    }
    case CostKind::decomposable: {
      require(y.size() >= spec.split, errc::bad_dimension, "decomposable: y shorter than split");
      const CostSpec& p = *spec.part1;
      const double c1 = p.scale * cost_base(p, x, y.head(spec.split)) + p.shift;
      const Eigen::VectorXd y2 = y.tail(y.size() - spec.split);
      return c1 + spec.tail(y2);
    }
  }
  fail(errc::bad_config, "unknown cost kind");
}

}  // namespace detail

// Pointwise ground cost: scale * base(x, y) + shift.
inline double eval_cost(const CostSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y) {
  return spec.scale * detail::cost_base(spec, x, y) + spec.shift;
}

// Dense n x m cost matrix over two supports (one point per row), bit-identical
// to looping eval_cost over all pairs. Refuses to materialize more than
// `budget` entries.
inline Eigen::MatrixXd cost_matrix(const CostSpec& spec, const Eigen::MatrixXd& X,
                                   const Eigen::MatrixXd& Y,
                                   Eigen::Index budget = kCostCacheBudget) {
  const Eigen::Index n = X.rows(), m = Y.rows();
  require(n > 0 && m > 0, errc::empty_support, "cost_matrix: empty support");
  require(m == 0 || n <= budget / m, errc::cache_budget_exceeded,
          "cost_matrix: n*m exceeds the dense cache budget");
  // Column-major supports so each atom is a contiguous vector for the kernel.
  const Eigen::MatrixXd Xt = X.transpose();
  const Eigen::MatrixXd Yt = Y.transpose();
  Eigen::MatrixXd C(n, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i) C(i, j) = eval_cost(spec, Xt.col(i), Yt.col(j));
  return C;
}

// Normalizes a problem to cost (c - b) / a and temperature eps / a, a > 0.
// The inverse map on optimal values is OT_{c,eps} = a * OT_{c',eps'} + b;
// potentials map back as (a * phi, a * psi).
inline std::pair<CostSpec, double> rescale_problem(const CostSpec& spec, double eps, double a,
                                                   double b) {
  require(a > 0.0, errc::bad_config, "rescale_problem: need a > 0");
  require(eps > 0.0, errc::nonpositive_eps, "rescale_problem: need eps > 0");
  CostSpec out = spec;
  out.scale = spec.scale / a;
  out.shift = (spec.shift - b) / a;
  return {out, eps / a};
}

}  // namespace eot
