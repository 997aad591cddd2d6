#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "eot/cost.hpp"
#include "eot/error.hpp"
#include "eot/measure.hpp"
#include "eot/rng.hpp"
#include "eot/sinkhorn.hpp"

namespace eot {

struct GwConfig {
  double eps = 1.0;
  double outer_tol = 1e-7;  // relative stall threshold on the outer objective
  int max_outer = 200;      // outer iterations (one transport solve each)
  SinkhornConfig inner;     // inner solver settings; eps is overwritten per solve
  int restarts = 1;         // restart 0 starts from A = 0, later ones randomize A
  uint64_t seed = 0;        // seeds the randomized restarts
};

struct GwSolution {
  double value = 0.0;          // marginal_part + coupled_part
  double marginal_part = 0.0;  // plan-independent moments of the two marginals
  double coupled_part = 0.0;   // min_A 32|A|_F^2 + OT_{c_A, eps}
  Eigen::MatrixXd A;           // the bilinear block attaining coupled_part
  long outer_iters = 0;        // transport solves performed in the best run
  std::vector<double> objective_trace;  // outer objective after every solve
  bool converged = false;
};

// Plan-independent part of the quartic Gromov discrepancy for centered
// marginals:
//   int int |x-x'|^4 dmu dmu + int int |y-y'|^4 dnu dnu - 4 m2(mu) m2(nu),
// with m2 the second moments. Plain O(n^2) double sums.
inline double gw11(const Measure& mu, const Measure& nu) {
  detail::check_measure(mu, "gw11 mu");
  detail::check_measure(nu, "gw11 nu");
  double xx = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
      const double d2 = (mu.points.row(i) - mu.points.row(k)).squaredNorm();
      xx += mu.weights[i] * mu.weights[k] * d2 * d2;
    }
  }
  double yy = 0.0;
  for (Eigen::Index j = 0; j < nu.size(); ++j) {
    for (Eigen::Index k = 0; k < nu.size(); ++k) {
      const double d2 = (nu.points.row(j) - nu.points.row(k)).squaredNorm();
      yy += nu.weights[j] * nu.weights[k] * d2 * d2;
    }
  }
  double m2x = 0.0, m2y = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    m2x += mu.weights[i] * mu.points.row(i).squaredNorm();
  for (Eigen::Index j = 0; j < nu.size(); ++j)
    m2y += nu.weights[j] * nu.points.row(j).squaredNorm();
  return xx + yy - 4.0 * m2x * m2y;
}

namespace detail {

inline double max_radius(const Measure& m) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    r = std::max(r, m.points.row(i).norm());
  return r;
}

inline double max_diameter(const Measure& m) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i)
    for (Eigen::Index k = i + 1; k < m.size(); ++k)
      r = std::max(r, (m.points.row(i) - m.points.row(k)).norm());
  return r;
}

inline void check_centered(const Measure& m, const char* name) {
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(m.dim());
  for (Eigen::Index i = 0; i < m.size(); ++i) mean += m.weights[i] * m.points.row(i);
  require(mean.cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + max_radius(m)), errc::bad_config,
          std::string(name) + ": support must be centered (use center())");
}

}  // namespace detail

// Coupled part of the discrepancy by block minimization of
//   J(A) = 32 |A|_F^2 + OT_{c_A, eps},  c_A(x, y) = -4|x|^2|y|^2 - 32 x^T A y,
// alternating a transport solve at fixed A with the closed-form block update
// A <- M(pi)/2, M(pi) = sum_ij pi_ij x_i y_j^T. Every iterate stays in the
// box |A_kl| <= r^2/2 with r the larger support diameter; violation is a
// hard error. Marginals must be centered beforehand. Convergence is declared
// when the block update no longer moves A (which bounds the gradient
// 64 A - 32 M(pi) by 64 outer_tol (1 + |A|)) or the objective stalls. The
// recorded objective uses the certified dual value of each inner solve, so
// with a tight inner tolerance the trace is non-increasing up to the inner
// duality gap.
inline GwSolution gw2_solve(const Measure& mu, const Measure& nu, const GwConfig& cfg) {
  detail::check_measure(mu, "gw2 mu");
  detail::check_measure(nu, "gw2 nu");
  detail::check_centered(mu, "gw2 mu");
  detail::check_centered(nu, "gw2 nu");
  require(cfg.eps > 0.0, errc::nonpositive_eps, "gw2: need eps > 0");
  require(cfg.max_outer >= 1 && cfg.restarts >= 1, errc::bad_config,
          "gw2: need max_outer >= 1 and restarts >= 1");
  require(mu.size() <= cfg.inner.cache_budget / nu.size(), errc::cache_budget_exceeded,
          "gw2: support pair exceeds the dense cache budget");

  const double r = std::max(detail::max_diameter(mu), detail::max_diameter(nu));
  const double bound = 0.5 * r * r;
  SinkhornConfig inner = cfg.inner;
  inner.eps = cfg.eps;
  inner.record_dual_trace = false;

  GwSolution best;
  bool have_best = false;
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(mu.dim(), nu.dim());
    if (restart > 0) {
      SplitMix64 gen(mix_seed(cfg.seed, static_cast<uint64_t>(restart)));
      for (Eigen::Index k = 0; k < A.rows(); ++k)
        for (Eigen::Index l = 0; l < A.cols(); ++l) A(k, l) = gen.uniform(-bound, bound);
    }

    GwSolution run;
    bool inner_ok = true;
    double prev = std::numeric_limits<double>::infinity();
    bool stable = false;
    for (int it = 0; it < cfg.max_outer; ++it) {
      const CostSpec c = gw_bilinear(A);
      const EotSolution sol = sinkhorn_solve(mu, nu, c, inner);
      inner_ok = inner_ok && sol.converged;
      const double obj = 32.0 * A.squaredNorm() + sol.dual_value;
      run.objective_trace.push_back(obj);
      run.outer_iters = it + 1;
      run.A = A;
      run.coupled_part = obj;

      const Eigen::MatrixXd P = plan(mu, nu, c, sol.potentials, cfg.eps, inner.cache_budget);
      const Eigen::MatrixXd A_next = 0.5 * (mu.points.transpose() * P * nu.points);
      require(A_next.cwiseAbs().maxCoeff() <= bound * (1.0 + 1e-9) + 1e-12,
              errc::a_bound_violated, "gw2: block update left the feasible box");
      const double step = (A_next - A).cwiseAbs().maxCoeff();
      if (step <= cfg.outer_tol * (1.0 + A.cwiseAbs().maxCoeff()) ||
          std::abs(obj - prev) <= cfg.outer_tol * (1.0 + std::abs(obj))) {
        stable = true;
        break;
      }
      prev = obj;
      A = A_next;
    }
    run.converged = stable && inner_ok;

    if (!have_best || run.coupled_part < best.coupled_part) {
      best = std::move(run);
      have_best = true;
    }
  }
  return best;
}

// Entropic Gromov discrepancy between mu and nu under the quartic cost
// (|x-x'|^2 - |y-y'|^2)^2. Translation invariant: both marginals are centered
// and the value splits into a moment part and the coupled part.
inline GwSolution entropic_gw(const Measure& mu, const Measure& nu, const GwConfig& cfg) {
  const Measure cmu = center(mu);
  const Measure cnu = center(nu);
  GwSolution out = gw2_solve(cmu, cnu, cfg);
  out.marginal_part = gw11(cmu, cnu);
  out.value = out.marginal_part + out.coupled_part;
  return out;
}

}  // namespace eot
