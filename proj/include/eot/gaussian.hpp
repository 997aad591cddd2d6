#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "eot/error.hpp"

namespace eot {

struct SymEig {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // columns, S = vectors * values.asDiagonal() * vectors^T
};

// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps. Input must
// be symmetric within 1e-12 * max(1, |S|_max). Kept self-contained so the
// Gaussian formulas depend on nothing beyond dense arithmetic.
inline SymEig sym_eig(const Eigen::MatrixXd& S) {
  require(S.rows() == S.cols(), errc::bad_dimension, "sym_eig: matrix not square");
  const Eigen::Index d = S.rows();
  SymEig out;
  if (d == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  require(S.allFinite(), errc::nonfinite_coordinate, "sym_eig: nonfinite entries");
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  require((S - S.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, errc::not_symmetric,
          "sym_eig: matrix not symmetric");

  Eigen::MatrixXd A = 0.5 * (S + S.transpose());
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(d, d);
  const double fro = std::max(A.norm(), std::numeric_limits<double>::min());
  const double stop = 1e-13 * fro;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < d; ++p)
      for (Eigen::Index q = p + 1; q < d; ++q) off += 2.0 * A(p, q) * A(p, q);
    if (std::sqrt(off) <= stop) break;
    for (Eigen::Index p = 0; p < d - 1; ++p) {
      for (Eigen::Index q = p + 1; q < d; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < d; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < d; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (Eigen::Index k = 0; k < d; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return A(a, a) > A(b, b); });
  out.values.resize(d);
  out.vectors.resize(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    out.values[k] = A(order[k], order[k]);
    out.vectors.col(k) = V.col(order[k]);
  }
  return out;
}

// Symmetric PSD square root. Eigenvalues in [-1e-10, 0) are clamped to zero;
// anything more negative is rejected as not positive semidefinite.
inline Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& S) {
  const SymEig e = sym_eig(S);
  Eigen::VectorXd lam = e.values;
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    require(lam[i] >= -1e-10, errc::not_psd, "sym_sqrt: negative eigenvalue");
    lam[i] = std::sqrt(std::max(lam[i], 0.0));
  }
  Eigen::MatrixXd R = e.vectors * lam.asDiagonal() * e.vectors.transpose();
  return 0.5 * (R + R.transpose());
}

// Entropic Bures discrepancy between covariance matrices:
//   B^2_eps(S1, S2) = tr(S1) + tr(S2) - tr(D)
//                     + (eps/2) * sum_i log(d_i + eps/2) + d (eps/2)(1 - log eps),
// where D = (4 S1^(1/2) S2 S1^(1/2) + (eps^2/4) I)^(1/2) with eigenvalues d_i.
// Satisfies B^2_eps(S, 0) = tr(S) for every eps.
inline double bures_eps(const Eigen::MatrixXd& S1, const Eigen::MatrixXd& S2, double eps) {
  require(eps > 0.0 && std::isfinite(eps), errc::nonpositive_eps, "bures_eps: need eps > 0");
  require(S1.rows() == S1.cols() && S2.rows() == S2.cols() && S1.rows() == S2.rows(),
          errc::bad_dimension, "bures_eps: covariance shapes differ");
  const Eigen::Index d = S1.rows();
  if (d == 0) return 0.0;
  const Eigen::MatrixXd S1h = sym_sqrt(S1);
  Eigen::MatrixXd G = 4.0 * (S1h * S2 * S1h);
  G = 0.5 * (G + G.transpose());
  G.diagonal().array() += eps * eps / 4.0;
  const SymEig e = sym_eig(G);
  double tr_d = 0.0, log_term = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double di = std::sqrt(std::max(e.values[i], 0.0));
    tr_d += di;
    log_term += std::log(di + eps / 2.0);
  }
  return S1.trace() + S2.trace() - tr_d + 0.5 * eps * log_term +
         static_cast<double>(d) * 0.5 * eps * (1.0 - std::log(eps));
}

// Closed-form entropic transport between Gaussians N(m1, S1) and N(m2, S2)
// for the squared Euclidean cost.
inline double gaussian_eot(const Eigen::VectorXd& m1, const Eigen::MatrixXd& S1,
                           const Eigen::VectorXd& m2, const Eigen::MatrixXd& S2, double eps) {
  require(m1.size() == m2.size(), errc::bad_dimension, "gaussian_eot: mean dimensions differ");
  require(S1.rows() == m1.size() && S2.rows() == m2.size(), errc::bad_dimension,
          "gaussian_eot: mean/covariance dimensions differ");
  return (m1 - m2).squaredNorm() + bures_eps(S1, S2, eps);
}

struct LcaCheck {
  double lhs = 0.0;  // full d-dimensional value
  double rhs = 0.0;  // s-dimensional value plus the exact complement trace
};

// When the first covariance factors as U1 diag(lam1) U1^T with U1 a d x s
// isometry, the d-dimensional discrepancy collapses to an s-dimensional one:
//   B^2_eps(U1 L U1^T, S2) = B^2_eps(L, U1^T S2 U1) + tr(S2) - tr(U1^T S2 U1).
// Returns both sides so callers can assert the identity.
inline LcaCheck gaussian_lca_check(const Eigen::MatrixXd& U1, const Eigen::VectorXd& lam1,
                                   const Eigen::MatrixXd& S2, double eps) {
  require(U1.cols() == lam1.size(), errc::bad_dimension, "lca: U1 columns must match lam1");
  require(U1.rows() == S2.rows() && S2.rows() == S2.cols(), errc::bad_dimension,
          "lca: S2 must be d x d with d = rows of U1");
  if (U1.cols() > 0) {  // s = 0 (zero first covariance) is valid and vacuously orthogonal
    const Eigen::MatrixXd gram = U1.transpose() * U1;
    require(
        (gram - Eigen::MatrixXd::Identity(U1.cols(), U1.cols())).cwiseAbs().maxCoeff() <= 1e-10,
        errc::not_orthogonal, "lca: U1^T U1 differs from the identity");
  }
  for (Eigen::Index i = 0; i < lam1.size(); ++i)
    require(lam1[i] >= -1e-10, errc::not_psd, "lca: negative spectrum");
  Eigen::VectorXd lam = lam1.cwiseMax(0.0);

  const Eigen::MatrixXd full = U1 * lam.asDiagonal() * U1.transpose();
  const Eigen::MatrixXd small = U1.transpose() * S2 * U1;
  LcaCheck out;
  out.lhs = bures_eps(0.5 * (full + full.transpose()), S2, eps);
  out.rhs = bures_eps(Eigen::MatrixXd(lam.asDiagonal()), 0.5 * (small + small.transpose()), eps) +
            S2.trace() - small.trace();
  return out;
}

}  // namespace eot
