#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "eot/cost.hpp"
#include "eot/error.hpp"
#include "eot/measure.hpp"

namespace eot {

struct SinkhornConfig {
  double eps = 1.0;
  double marginal_tol = 1e-8;  // total-variation threshold on the lagging marginal
  long max_iters = 1000000;    // Sinkhorn pairs (one phi update + one psi update)
  int check_every = 10;        // convergence checked at pair 1, then every this many pairs
  Eigen::Index cache_budget = kCostCacheBudget;  // above this, cost rows are streamed
  bool record_dual_trace = false;                // store the dual value at every check
};

struct Potentials {
  Eigen::VectorXd phi;  // on the mu support
  Eigen::VectorXd psi;  // on the nu support
};

struct EotSolution {
  double dual_value = 0.0;
  double primal_value = 0.0;
  Potentials potentials;
  long iterations = 0;  // completed pairs
  double marginal_err_mu = 0.0;
  double marginal_err_nu = 0.0;
  bool converged = false;
  std::vector<double> dual_trace;  // filled when record_dual_trace is set
};

// l1 distance between two weight vectors (the stopping quantity).
inline double marginal_tv_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size(), errc::bad_dimension, "marginal_tv_error: size mismatch");
  return (a - b).cwiseAbs().sum();
}

// Coarse worst-case pair budget sufficient to reach l1 marginal error `tol` on
// an n-point problem. Diagnostic only; the solver always stops on the measured
// marginal error, which in practice is reached far earlier.
inline long sinkhorn_iteration_budget(Eigen::Index n, double cost_sup, double eps, double tol) {
  require(eps > 0.0 && tol > 0.0, errc::nonpositive_eps, "iteration budget: need eps, tol > 0");
  require(n >= 1, errc::empty_support, "iteration budget: need n >= 1");
  const double m =
      2.0 + 20.0 / tol * cost_sup * (3.0 * std::log(static_cast<double>(n)) + cost_sup / eps);
  if (m > 9e18) return std::numeric_limits<long>::max();
  return static_cast<long>(m);
}

namespace detail {

// Cost row c(x, Y): the same scalar kernel as cost_matrix, evaluated against a
// pre-transposed target support (columns are atoms).
inline Eigen::VectorXd cost_row(const CostSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                                const Eigen::MatrixXd& Yt) {
  Eigen::VectorXd r(Yt.cols());
  for (Eigen::Index j = 0; j < Yt.cols(); ++j) r[j] = eval_cost(spec, x, Yt.col(j));
  return r;
}

// Cost column c(X, y); first/second argument order matters for the
// asymmetric cost variants.
inline Eigen::VectorXd cost_col(const CostSpec& spec, const Eigen::MatrixXd& Xt,
                                const Eigen::Ref<const Eigen::VectorXd>& y) {
  Eigen::VectorXd r(Xt.cols());
  for (Eigen::Index i = 0; i < Xt.cols(); ++i) r[i] = eval_cost(spec, Xt.col(i), y);
  return r;
}

// out_j = -eps * LSE_i(logw_i + (f_i - C_ij)/eps): transform across the rows of
// a cached cost block, one contiguous column at a time.
inline Eigen::VectorXd transform_cols(const Eigen::VectorXd& f, const Eigen::VectorXd& logw,
                                      const Eigen::MatrixXd& C, double eps) {
  const double inv_eps = 1.0 / eps;
  const Eigen::ArrayXd g = logw.array() + f.array() * inv_eps;
  Eigen::VectorXd out(C.cols());
  Eigen::ArrayXd a(C.rows());
  for (Eigen::Index j = 0; j < C.cols(); ++j) {
    a = g - C.col(j).array() * inv_eps;
    const double m = a.maxCoeff();
    out[j] = -eps * (m + std::log((a - m).exp().sum()));
  }
  return out;
}

// out_i = -eps * LSE_j(logv_j + (f_j - C_ij)/eps): transform across the
// columns of a cached cost block, two passes (running max, then exp sum) so
// the sweep stays contiguous in the column-major cache.
inline Eigen::VectorXd transform_rows(const Eigen::VectorXd& f, const Eigen::VectorXd& logv,
                                      const Eigen::MatrixXd& C, double eps) {
  const double inv_eps = 1.0 / eps;
  const Eigen::ArrayXd b = logv.array() + f.array() * inv_eps;
  Eigen::ArrayXd m = Eigen::ArrayXd::Constant(C.rows(), -std::numeric_limits<double>::infinity());
  for (Eigen::Index j = 0; j < C.cols(); ++j) m = m.max(b[j] - C.col(j).array() * inv_eps);
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(C.rows());
  for (Eigen::Index j = 0; j < C.cols(); ++j)
    s += (b[j] - C.col(j).array() * inv_eps - m).exp();
  return (-eps * (m + s.log())).matrix();
}

// Streamed variants: identical mathematics without a cached matrix. Rows of
// the cost are regenerated on the fly with a fixed within-row arithmetic
// order, so results are reproducible run to run for a given problem size.
inline Eigen::VectorXd transform_rows_streamed(const Eigen::VectorXd& f,
                                               const Eigen::VectorXd& logv,
                                               const CostSpec& spec, const Eigen::MatrixXd& Xt,
                                               const Eigen::MatrixXd& Yt, double eps) {
  const double inv_eps = 1.0 / eps;
  const Eigen::ArrayXd b = logv.array() + f.array() * inv_eps;
  Eigen::VectorXd out(Xt.cols());
  for (Eigen::Index i = 0; i < Xt.cols(); ++i) {
    const Eigen::ArrayXd a = b - cost_row(spec, Xt.col(i), Yt).array() * inv_eps;
    const double m = a.maxCoeff();
    out[i] = -eps * (m + std::log((a - m).exp().sum()));
  }
  return out;
}

inline Eigen::VectorXd transform_cols_streamed(const Eigen::VectorXd& f,
                                               const Eigen::VectorXd& logw,
                                               const CostSpec& spec, const Eigen::MatrixXd& Xt,
                                               const Eigen::MatrixXd& Yt, double eps) {
  const double inv_eps = 1.0 / eps;
  const Eigen::ArrayXd g = logw.array() + f.array() * inv_eps;
  Eigen::ArrayXd m =
      Eigen::ArrayXd::Constant(Yt.cols(), -std::numeric_limits<double>::infinity());
  for (Eigen::Index i = 0; i < Xt.cols(); ++i)
    m = m.max(g[i] - cost_row(spec, Xt.col(i), Yt).array() * inv_eps);
  Eigen::ArrayXd s = Eigen::ArrayXd::Zero(Yt.cols());
  for (Eigen::Index i = 0; i < Xt.cols(); ++i)
    s += (g[i] - cost_row(spec, Xt.col(i), Yt).array() * inv_eps - m).exp();
  return (-eps * (m + s.log())).matrix();
}

// TV error of the lagging marginal from the potential increment: the plan of
// (phi, psi) has row masses w_i * exp((phi_i - T(psi)_i)/eps).
inline double lagging_marginal_err(const Eigen::VectorXd& phi, const Eigen::VectorXd& phi_next,
                                   const Eigen::VectorXd& w, double eps) {
  return (w.array() * (((phi - phi_next).array() / eps).exp() - 1.0).abs()).sum();
}

inline void check_measure(const DiscreteMeasure<double>& m, const char* name) {
  require(m.size() > 0, errc::empty_support, std::string(name) + ": empty support");
  require(m.weights.size() == m.points.rows(), errc::bad_dimension,
          std::string(name) + ": weight/point count mismatch");
  require(m.weights.allFinite() && m.points.allFinite(), errc::nonfinite_coordinate,
          std::string(name) + ": nonfinite entries");
  require((m.weights.array() >= 0.0).all(), errc::negative_weight,
          std::string(name) + ": negative weight");
  require(std::abs(m.weights.sum() - 1.0) <= 1e-9, errc::bad_config,
          std::string(name) + ": weights not normalized; build measures with make_measure");
}

inline void check_config(const SinkhornConfig& cfg) {
  require(cfg.eps > 0.0 && std::isfinite(cfg.eps), errc::nonpositive_eps,
          "sinkhorn: need eps > 0");
  require(cfg.marginal_tol > 0.0, errc::bad_config, "sinkhorn: need marginal_tol > 0");
  require(cfg.max_iters >= 1, errc::bad_config, "sinkhorn: need max_iters >= 1");
  require(cfg.check_every >= 1, errc::bad_config, "sinkhorn: need check_every >= 1");
  require(cfg.cache_budget >= 1, errc::bad_config, "sinkhorn: need cache_budget >= 1");
}

}  // namespace detail

// The entropic transform of potentials f on the source support, evaluated at
// the target points:
//   out(t) = -eps * log( sum_i w_i exp( (f_i - c(x_i, t)) / eps ) ),
// with a max shift inside the log-sum-exp. Zero-weight atoms are skipped.
inline Eigen::VectorXd entropic_transform(const Eigen::VectorXd& f, const Measure& source,
                                          const Eigen::MatrixXd& target_points,
                                          const CostSpec& spec, double eps,
                                          Eigen::Index cache_budget = kCostCacheBudget) {
  detail::check_measure(source, "entropic_transform source");
  require(eps > 0.0 && std::isfinite(eps), errc::nonpositive_eps,
          "entropic_transform: need eps > 0");
  require(f.size() == source.size(), errc::bad_dimension,
          "entropic_transform: potential length does not match source support");
  require(target_points.rows() > 0, errc::empty_support, "entropic_transform: no target points");
  require(f.allFinite(), errc::nonfinite_coordinate, "entropic_transform: nonfinite potential");

  std::vector<Eigen::Index> keep;
  keep.reserve(source.size());
  for (Eigen::Index i = 0; i < source.size(); ++i)
    if (source.weights[i] > 0.0) keep.push_back(i);
  require(!keep.empty(), errc::empty_support, "entropic_transform: source carries no mass");

  const Eigen::Index n = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd Xt(source.dim(), n);
  Eigen::VectorXd fr(n), logw(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    Xt.col(r) = source.points.row(keep[r]).transpose();
    fr[r] = f[keep[r]];
    logw[r] = std::log(source.weights[keep[r]]);
  }
  const Eigen::MatrixXd Tt = target_points.transpose();
  if (n <= cache_budget / std::max<Eigen::Index>(target_points.rows(), 1)) {
    Eigen::MatrixXd C(n, target_points.rows());
    for (Eigen::Index j = 0; j < C.cols(); ++j)
      for (Eigen::Index i = 0; i < n; ++i) C(i, j) = eval_cost(spec, Xt.col(i), Tt.col(j));
    return detail::transform_cols(fr, logw, C, eps);
  }
  return detail::transform_cols_streamed(fr, logw, spec, Xt, Tt, eps);
}

namespace detail {

// Shared state of one reduced (positive-weight) Sinkhorn problem.
struct SinkhornProblem {
  const CostSpec* spec = nullptr;
  double eps = 1.0;
  Eigen::MatrixXd Xt, Yt;  // d x n, d x m supports, atoms as columns
  Eigen::VectorXd w, v, logw, logv;
  Eigen::MatrixXd C;  // cached cost, empty when streaming
  bool streamed = false;

  Eigen::Index n() const { return Xt.cols(); }
  Eigen::Index m() const { return Yt.cols(); }

  Eigen::VectorXd phi_update(const Eigen::VectorXd& psi) const {
    return streamed ? transform_rows_streamed(psi, logv, *spec, Xt, Yt, eps)
                    : transform_rows(psi, logv, C, eps);
  }
  Eigen::VectorXd psi_update(const Eigen::VectorXd& phi) const {
    return streamed ? transform_cols_streamed(phi, logw, *spec, Xt, Yt, eps)
                    : transform_cols(phi, logw, C, eps);
  }

  // <C, pi> + eps * KL(pi | mu x nu) for the implied plan of (phi, psi); the
  // KL integrand is evaluated in the log domain as pi * (phi+psi-C)/eps.
  std::pair<double, double> primal_terms(const Eigen::VectorXd& phi,
                                         const Eigen::VectorXd& psi) const {
    const double inv_eps = 1.0 / eps;
    const Eigen::ArrayXd rowpart = logw.array() + phi.array() * inv_eps;
    const Eigen::ArrayXd colpart = logv.array() + psi.array() * inv_eps;
    double cost_sum = 0.0, kl_sum = 0.0;
    for (Eigen::Index j = 0; j < m(); ++j) {
      const Eigen::ArrayXd crow = streamed ? Eigen::ArrayXd(cost_col(*spec, Xt, Yt.col(j)))
                                           : Eigen::ArrayXd(C.col(j));
      const Eigen::ArrayXd ell = phi.array() * inv_eps + psi[j] * inv_eps - crow * inv_eps;
      const Eigen::ArrayXd pi = (rowpart + colpart[j] - crow * inv_eps).exp();
      cost_sum += (pi * crow).sum();
      kl_sum += (pi * ell).sum();
    }
    return {cost_sum, kl_sum};
  }
};

inline SinkhornProblem reduce_problem(const Measure& mu, const Measure& nu, const CostSpec& spec,
                                      const SinkhornConfig& cfg,
                                      std::vector<Eigen::Index>& keep_mu,
                                      std::vector<Eigen::Index>& keep_nu) {
  keep_mu.clear();
  keep_nu.clear();
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (mu.weights[i] > 0.0) keep_mu.push_back(i);
  for (Eigen::Index j = 0; j < nu.size(); ++j)
    if (nu.weights[j] > 0.0) keep_nu.push_back(j);
  require(!keep_mu.empty() && !keep_nu.empty(), errc::empty_support,
          "sinkhorn: a marginal carries no mass");

  SinkhornProblem p;
  p.spec = &spec;
  p.eps = cfg.eps;
  const Eigen::Index n = static_cast<Eigen::Index>(keep_mu.size());
  const Eigen::Index m = static_cast<Eigen::Index>(keep_nu.size());
  p.Xt.resize(mu.dim(), n);
  p.Yt.resize(nu.dim(), m);
  p.w.resize(n);
  p.v.resize(m);
  for (Eigen::Index r = 0; r < n; ++r) {
    p.Xt.col(r) = mu.points.row(keep_mu[r]).transpose();
    p.w[r] = mu.weights[keep_mu[r]];
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    p.Yt.col(r) = nu.points.row(keep_nu[r]).transpose();
    p.v[r] = nu.weights[keep_nu[r]];
  }
  // Scalar std::log keeps these bitwise identical to entropic_transform's
  // internals (Eigen's vectorized log can differ in the last ulp).
  p.logw.resize(n);
  p.logv.resize(m);
  for (Eigen::Index r = 0; r < n; ++r) p.logw[r] = std::log(p.w[r]);
  for (Eigen::Index r = 0; r < m; ++r) p.logv[r] = std::log(p.v[r]);
  p.streamed = n > cfg.cache_budget / m;
  if (!p.streamed) {
    p.C.resize(n, m);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < n; ++i) p.C(i, j) = eval_cost(spec, p.Xt.col(i), p.Yt.col(j));
  }
  return p;
}

}  // namespace detail

// Log-domain Sinkhorn from psi = 0: each pair updates phi against nu, then psi
// against mu, exactly alternating the entropic transform. After a pair the nu
// marginal of the implied plan is exact by construction, so convergence is
// declared on the TV error of the lagging mu marginal (checked at pair 1 and
// then every check_every pairs, since the check costs one extra transform).
// Failure to converge within max_iters is reported via `converged`, not thrown.
inline EotSolution sinkhorn_solve(const Measure& mu, const Measure& nu, const CostSpec& spec,
                                  const SinkhornConfig& cfg) {
  detail::check_measure(mu, "sinkhorn mu");
  detail::check_measure(nu, "sinkhorn nu");
  detail::check_config(cfg);

  std::vector<Eigen::Index> keep_mu, keep_nu;
  const detail::SinkhornProblem p = detail::reduce_problem(mu, nu, spec, cfg, keep_mu, keep_nu);

  EotSolution sol;
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(p.m());
  Eigen::VectorXd phi = p.phi_update(psi);
  psi = p.psi_update(phi);
  long k = 1;
  Eigen::VectorXd phi_next;
  bool have_phi_next = false;
  while (true) {
    const bool checking = (k - 1) % cfg.check_every == 0;
    if (checking) {
      phi_next = p.phi_update(psi);
      have_phi_next = true;
      const double err = detail::lagging_marginal_err(phi, phi_next, p.w, p.eps);
      if (cfg.record_dual_trace) sol.dual_trace.push_back(p.w.dot(phi) + p.v.dot(psi));
      if (err <= cfg.marginal_tol) {
        sol.converged = true;
        break;
      }
    }
    if (k >= cfg.max_iters) break;
    phi = checking ? phi_next : p.phi_update(psi);
    have_phi_next = false;
    psi = p.psi_update(phi);
    ++k;
  }
  sol.iterations = k;

  if (!have_phi_next) phi_next = p.phi_update(psi);
  sol.marginal_err_mu = detail::lagging_marginal_err(phi, phi_next, p.w, p.eps);
  sol.marginal_err_nu = detail::lagging_marginal_err(psi, p.psi_update(phi), p.v, p.eps);
  sol.dual_value = p.w.dot(phi) + p.v.dot(psi);
  const auto [cost_sum, kl_sum] = p.primal_terms(phi, psi);
  sol.primal_value = cost_sum + p.eps * kl_sum;

  // Extend the potentials back to dropped zero-weight atoms through one more
  // transform evaluation; they carry no mass but stay well defined.
  sol.potentials.phi.resize(mu.size());
  sol.potentials.psi.resize(nu.size());
  for (Eigen::Index r = 0; r < p.n(); ++r) sol.potentials.phi[keep_mu[r]] = phi[r];
  for (Eigen::Index r = 0; r < p.m(); ++r) sol.potentials.psi[keep_nu[r]] = psi[r];
  if (static_cast<Eigen::Index>(keep_mu.size()) < mu.size()) {
    for (Eigen::Index i = 0, r = 0; i < mu.size(); ++i) {
      if (r < p.n() && keep_mu[r] == i) {
        ++r;
        continue;
      }
      const Eigen::VectorXd x = mu.points.row(i).transpose();
      const Eigen::ArrayXd a =
          p.logv.array() + (psi.array() - detail::cost_row(spec, x, p.Yt).array()) / p.eps;
      const double mx = a.maxCoeff();
      sol.potentials.phi[i] = -p.eps * (mx + std::log((a - mx).exp().sum()));
    }
  }
  if (static_cast<Eigen::Index>(keep_nu.size()) < nu.size()) {
    for (Eigen::Index j = 0, r = 0; j < nu.size(); ++j) {
      if (r < p.m() && keep_nu[r] == j) {
        ++r;
        continue;
      }
      const Eigen::VectorXd y = nu.points.row(j).transpose();
      const Eigen::ArrayXd a =
          p.logw.array() + (phi.array() - detail::cost_col(spec, p.Xt, y).array()) / p.eps;
      const double mx = a.maxCoeff();
      sol.potentials.psi[j] = -p.eps * (mx + std::log((a - mx).exp().sum()));
    }
  }
  return sol;
}

// The implied transport plan pi_ij = w_i v_j exp((phi_i + psi_j - C_ij)/eps),
// assembled in the log domain. Rows and columns of zero-weight atoms are zero.
inline Eigen::MatrixXd plan(const Measure& mu, const Measure& nu, const CostSpec& spec,
                            const Potentials& pot, double eps,
                            Eigen::Index cache_budget = kCostCacheBudget) {
  detail::check_measure(mu, "plan mu");
  detail::check_measure(nu, "plan nu");
  require(eps > 0.0, errc::nonpositive_eps, "plan: need eps > 0");
  require(pot.phi.size() == mu.size() && pot.psi.size() == nu.size(), errc::bad_dimension,
          "plan: potential lengths do not match supports");
  require(mu.size() <= cache_budget / nu.size(), errc::cache_budget_exceeded,
          "plan: n*m exceeds the dense cache budget");
  const Eigen::MatrixXd Xt = mu.points.transpose();
  const Eigen::MatrixXd Yt = nu.points.transpose();
  Eigen::MatrixXd P(mu.size(), nu.size());
  for (Eigen::Index j = 0; j < nu.size(); ++j) {
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      if (mu.weights[i] == 0.0 || nu.weights[j] == 0.0) {
        P(i, j) = 0.0;
        continue;
      }
      const double c = eval_cost(spec, Xt.col(i), Yt.col(j));
      // Entries of a (near-)feasible plan live in [0, 1]; clip the upper end
      // against last-ulp overshoot of the exponential.
      P(i, j) = std::min(1.0, std::exp(std::log(mu.weights[i]) + std::log(nu.weights[j]) +
                                       (pot.phi[i] + pot.psi[j] - c) / eps));
    }
  }
  return P;
}

struct DivergenceResult {
  double value = 0.0;
  bool converged = false;
  long iterations = 0;  // summed over the three solves
  EotSolution cross;    // the (mu, nu) solve, kept for reporting
};

// Sinkhorn divergence S(mu, nu) = OT(mu, nu) - (OT(mu, mu) + OT(nu, nu)) / 2.
inline DivergenceResult sinkhorn_divergence(const Measure& mu, const Measure& nu,
                                            const CostSpec& spec, const SinkhornConfig& cfg) {
  require(spec.kind == CostKind::sq_euclidean || spec.kind == CostKind::l1 ||
              spec.kind == CostKind::l_inf,
          errc::wrong_cost_variant, "divergence: needs a symmetric cost on a common space");
  DivergenceResult r;
  r.cross = sinkhorn_solve(mu, nu, spec, cfg);
  const EotSolution self_mu = sinkhorn_solve(mu, mu, spec, cfg);
  const EotSolution self_nu = sinkhorn_solve(nu, nu, spec, cfg);
  r.value = r.cross.dual_value - 0.5 * (self_mu.dual_value + self_nu.dual_value);
  r.converged = r.cross.converged && self_mu.converged && self_nu.converged;
  r.iterations = r.cross.iterations + self_mu.iterations + self_nu.iterations;
  return r;
}

struct ProjectiveSolution {
  double value = 0.0;      // OT for the full decomposable cost
  double tail_term = 0.0;  // exact integral of the tail against nu's tail block
  EotSolution sub;         // the reduced (mu, nu_head) solve
};

// For cost scale*(c1(x, y1) + c2(y2)) + shift the transport decouples:
//   OT = OT_{scale*c1+shift}(mu, nu_1) + scale * sum_j v_j c2(y2_j),
// so only the head block of nu enters a solve.
inline ProjectiveSolution eot_projective(const Measure& mu, const Measure& nu,
                                         const CostSpec& spec, const SinkhornConfig& cfg) {
  require(spec.kind == CostKind::decomposable, errc::wrong_cost_variant,
          "eot_projective: cost must be decomposable");
  detail::check_measure(nu, "eot_projective nu");
  require(nu.dim() >= spec.split, errc::bad_dimension,
          "eot_projective: nu has fewer columns than the split point");

  ProjectiveSolution out;
  double tail_sum = 0.0;
  for (Eigen::Index j = 0; j < nu.size(); ++j) {
    const Eigen::VectorXd y2 = nu.points.row(j).tail(nu.dim() - spec.split).transpose();
    tail_sum += nu.weights[j] * spec.tail(y2);
  }
  out.tail_term = spec.scale * tail_sum;

  CostSpec head = *spec.part1;
  head.scale *= spec.scale;
  head.shift = spec.scale * head.shift + spec.shift;
  Measure nu_head;
  nu_head.points = nu.points.leftCols(spec.split);
  nu_head.weights = nu.weights;
  out.sub = sinkhorn_solve(mu, nu_head, head, cfg);
  out.value = out.sub.dual_value + out.tail_term;
  return out;
}

struct OrthogonalSolution {
  double value = 0.0;          // OT between the embedded mu and nu
  double residual_term = 0.0;  // scale * E |(I - U U^T)(Y - v)|^2
  EotSolution sub;             // the s-dimensional solve
};

// Squared-Euclidean transport against an isometric embedding x -> U x + v of
// the low-dimensional measure: push nu through y -> U^T (y - v), solve in s
// dimensions, and add the exact residual second moment. Valid for any scale a
// and shift b of the cost (the residual scales by a; the shift passes through).
inline OrthogonalSolution eot_orthogonal(const Measure& x_measure, const Measure& y_measure,
                                         const Eigen::MatrixXd& U, const Eigen::VectorXd& v,
                                         const CostSpec& spec, const SinkhornConfig& cfg) {
  require(spec.kind == CostKind::sq_euclidean, errc::wrong_cost_variant,
          "eot_orthogonal: cost must be squared Euclidean");
  detail::check_measure(x_measure, "eot_orthogonal x");
  detail::check_measure(y_measure, "eot_orthogonal y");
  require(U.rows() == y_measure.dim() && U.cols() == x_measure.dim(), errc::bad_dimension,
          "eot_orthogonal: U must be d x s");
  require(v.size() == U.rows(), errc::bad_dimension, "eot_orthogonal: v must be d-dimensional");
  const Eigen::MatrixXd gram = U.transpose() * U;
  require((gram - Eigen::MatrixXd::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff() <= 1e-10,
          errc::not_orthogonal, "eot_orthogonal: U^T U differs from the identity");

  const Eigen::MatrixXd shifted = y_measure.points.rowwise() - v.transpose();
  Measure projected;
  projected.points = shifted * U;  // rows are U^T (y_j - v)
  projected.weights = y_measure.weights;

  // |(I - U U^T) z|^2 = |z|^2 - |U^T z|^2 when U^T U = I.
  double resid = 0.0;
  for (Eigen::Index j = 0; j < y_measure.size(); ++j)
    resid += y_measure.weights[j] *
             (shifted.row(j).squaredNorm() - projected.points.row(j).squaredNorm());

  OrthogonalSolution out;
  out.residual_term = spec.scale * resid;
  out.sub = sinkhorn_solve(x_measure, projected, spec, cfg);
  out.value = out.sub.dual_value + out.residual_term;
  return out;
}

}  // namespace eot
