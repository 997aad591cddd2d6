#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "eot/error.hpp"
#include "eot/rng.hpp"

namespace eot {

// A finitely supported probability measure: one support atom per row of
// `points`, simplex weights summing to one.
template <class Scalar = double>
struct DiscreteMeasure {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> points;  // n x d
  Eigen::Vector<Scalar, Eigen::Dynamic> weights;                 // n

  Eigen::Index size() const { return weights.size(); }
  Eigen::Index dim() const { return points.cols(); }
};

using Measure = DiscreteMeasure<double>;

// Validates and normalizes (points, weights) into a probability measure.
// Weights must be finite and nonnegative with positive total mass; coordinates
// must be finite. After dividing by the total mass the rounding residual of
// the weight sum is absorbed into the heaviest atom, so the sum is exactly
// representable as 1 within one ulp regardless of the support size.
template <class Derived, class WDerived>
DiscreteMeasure<typename Derived::Scalar> make_measure(
    const Eigen::MatrixBase<Derived>& points, const Eigen::MatrixBase<WDerived>& weights) {
  using Scalar = typename Derived::Scalar;
  DiscreteMeasure<Scalar> m;
  m.points = points;
  m.weights = weights;
  require(m.weights.size() > 0, errc::empty_support, "measure has no atoms");
  require(m.weights.size() == m.points.rows(), errc::bad_dimension,
          "weight count does not match point count");
  require(m.weights.allFinite(), errc::nonfinite_coordinate, "nonfinite weight");
  require(m.points.allFinite(), errc::nonfinite_coordinate, "nonfinite coordinate");
  require((m.weights.array() >= Scalar(0)).all(), errc::negative_weight, "negative weight");
  const Scalar total = m.weights.sum();
  require(total > Scalar(0), errc::empty_support, "weights carry no mass");
  m.weights /= total;
  Eigen::Index heaviest = 0;
  m.weights.maxCoeff(&heaviest);
  m.weights[heaviest] -= m.weights.sum() - Scalar(1);
  return m;
}

// Subtracts the weighted mean from every atom, repeating until the residual
// mean is negligible at machine precision. Every exit condition below depends
// only on the current state (the mean is accumulated compensated, in a fixed
// atom order, so recomputing it on the returned measure reproduces it bit for
// bit); a second call therefore stops before touching the points, making
// center(center(m)) == center(m) exact. A plain pass-count cutoff would not
// give this: subtracting an O(ulp) mean can oscillate between two states
// forever, and cutting that cycle mid-way leaves a state the next call moves.
template <class Scalar>
DiscreteMeasure<Scalar> center(DiscreteMeasure<Scalar> m) {
  using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  const Eigen::Index n = m.points.rows(), d = m.points.cols();
  if (n == 0 || d == 0) return m;
  const auto add = [](Scalar& sum, Scalar& comp, Scalar v) {
    const Scalar t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  };
  for (int pass = 0; pass < 64; ++pass) {
    Scalar total = 0, tc = 0;
    for (Eigen::Index i = 0; i < n; ++i) add(total, tc, m.weights[i]);
    total += tc;
    if (total == Scalar(0)) break;
    RowVec mean(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      Scalar s = 0, c = 0;
      for (Eigen::Index i = 0; i < n; ++i) add(s, c, m.weights[i] * m.points(i, k));
      mean[k] = (s + c) / total;
    }
    const Scalar scale = std::max(Scalar(1), m.points.cwiseAbs().maxCoeff());
    if (mean.cwiseAbs().maxCoeff() <=
        Scalar(16) * std::numeric_limits<Scalar>::epsilon() * scale)
      break;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> moved =
        m.points.rowwise() - mean;
    if ((moved.array() == m.points.array()).all()) break;
    m.points = std::move(moved);
  }
  return m;
}

// n uniform draws on [0,1]^d1 x {0}^(pad_to-d1), one atom per row, uniform
// weights. Coordinates are drawn atom by atom from the seeded stream.
inline Measure sample_cube(int d1, int pad_to, int n, std::uint64_t seed) {
  require(d1 >= 1 && pad_to >= d1, errc::bad_dimension, "sample_cube: need 1 <= d1 <= pad_to");
  require(n >= 1, errc::empty_support, "sample_cube: need n >= 1");
  SplitMix64 gen(seed);
  Measure m;
  m.points = Eigen::MatrixXd::Zero(n, pad_to);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d1; ++k) m.points(i, k) = gen.uniform01();
  m.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  return m;
}

// n draws from the normal with the given mean and standard deviation
// conditioned on [lo, hi], by rejection against the untruncated normal.
// For (1.0, 0.4, [0, 1]) the acceptance rate is about 0.49.
inline Eigen::VectorXd sample_truncnorm(double mean, double sd, double lo, double hi, int n,
                                        std::uint64_t seed) {
  require(sd > 0.0, errc::bad_config, "sample_truncnorm: need sd > 0");
  require(lo < hi, errc::bad_config, "sample_truncnorm: need lo < hi");
  require(n >= 1, errc::empty_support, "sample_truncnorm: need n >= 1");
  SplitMix64 gen(seed);
  Eigen::VectorXd out(n);
  for (int i = 0; i < n; ++i) {
    long attempts = 0;
    double x;
    do {
      x = mean + sd * gen.normal();
      require(++attempts < 100000000L, errc::bad_config,
              "sample_truncnorm: acceptance region too far in the tail");
    } while (x < lo || x > hi);
    out[i] = x;
  }
  return out;
}

enum class SurfaceKind { T, S };

// Pushforward samplers for the two surface maps.
//   kind T: x ~ U[0,1]^d,                    maps to (x_1..x_d, x_1^2, ..., x_1^2)   (k copies)
//   kind S: x_j ~ TruncNorm(1, 0.4^2; [0,1]), maps to (x_1..x_d, sqrt(1-x_1^2), ..., sqrt(1-x_k^2))
// k <= d is required only for kind S, whose map reads x_1..x_k; kind T repeats
// x_1^2 and is well defined for any k >= 0 (the padded settings need that).
inline Measure sample_surface(SurfaceKind kind, int d, int k, int n, std::uint64_t seed) {
  require(d >= 1 && k >= 0, errc::bad_dimension, "sample_surface: need d >= 1, k >= 0");
  require(kind == SurfaceKind::T || k <= d, errc::bad_dimension,
          "sample_surface: kind S needs k <= d");
  require(n >= 1, errc::empty_support, "sample_surface: need n >= 1");
  Measure m;
  m.points.resize(n, d + k);
  if (kind == SurfaceKind::T) {
    SplitMix64 gen(seed);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) m.points(i, j) = gen.uniform01();
      const double h = m.points(i, 0) * m.points(i, 0);
      for (int j = 0; j < k; ++j) m.points(i, d + j) = h;
    }
  } else {
    // One flat stream of n*d truncated-normal draws, filled row by row.
    const Eigen::VectorXd draws = sample_truncnorm(1.0, 0.4, 0.0, 1.0, n * d, seed);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) m.points(i, j) = draws[i * d + j];
      for (int j = 0; j < k; ++j) {
        const double x = m.points(i, j);
        m.points(i, d + j) = std::sqrt(1.0 - x * x);
      }
    }
  }
  m.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  return m;
}

// A uniformly weighted support of `atoms` i.i.d. U[0,1]^d points. Used as the
// fixed discrete marginal of the semi-discrete setting: the same seed
// reproduces the same support across every repetition of an experiment.
inline Measure fixed_discrete_support(int atoms, int d, std::uint64_t seed) {
  return sample_cube(d, d, atoms, seed);
}

}  // namespace eot
