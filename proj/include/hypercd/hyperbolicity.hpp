#pragma once

#include <cstdint>
#include <vector>

#include "hypercd/ball.hpp"
#include "hypercd/types.hpp"

namespace hypercd::hyperbolicity {

/// Which distance the point set is measured with.
struct MetricChoice {
  enum class Kind { kEuclidean, kPoincare };

  static MetricChoice euclidean();
  static MetricChoice poincare(ball::Curvature curvature);

  Kind kind = Kind::kEuclidean;
  ball::Curvature curvature = ball::Curvature(1.0);
};

/// Symmetric matrix of pairwise Gromov products relative to the point at
/// base_index; the base row and column are identically zero.
struct GromovMatrix {
  Mat a;
  Index base_index = 0;
};

/// (y, z)_x = (d(x,y) + d(x,z) - d(y,z)) / 2.
double gromov_product(const Vec& x, const Vec& y, const Vec& z,
                      const MetricChoice& metric);

/// All pairwise distances of the point set. Poincare points are first
/// projected into the ball.
Mat pairwise_distances(const std::vector<Vec>& points,
                       const MetricChoice& metric);

GromovMatrix gromov_matrix(const std::vector<Vec>& points, Index base_index,
                           const MetricChoice& metric);
GromovMatrix gromov_matrix_from_distances(const Mat& distances,
                                          Index base_index);

/// (A (+) B)_ij = max_k min(A_ik, B_kj).
Mat minmax_product(const Mat& a, const Mat& b);

/// Pointed four-point hyperbolicity: max entry of (A (+) A) - A.
double delta(const std::vector<Vec>& points, Index base_index,
             const MetricChoice& metric);
double delta_from_distances(const Mat& distances, Index base_index);

/// Scale-free hyperbolicity 2*delta/diameter, in [0, 1]. Throws
/// std::domain_error when all points coincide.
double relative_delta(const std::vector<Vec>& points, Index base_index,
                      const MetricChoice& metric);
double relative_delta_from_distances(const Mat& distances, Index base_index);

struct SampledDelta {
  double delta_mean = 0.0;
  double delta_std = 0.0;
  double relative_mean = 0.0;
  double relative_std = 0.0;
  int sample_size = 0;
  int trials = 0;
};

/// Monte Carlo estimate over subsamples drawn without replacement; the base
/// point of each trial is the first index drawn. Each trial derives its own
/// random stream from (seed, trial), so results do not depend on evaluation
/// order. Std is the population standard deviation over trials.
SampledDelta delta_sampled(const std::vector<Vec>& points, int sample_size,
                           int trials, std::uint64_t seed,
                           const MetricChoice& metric);

}  // namespace hypercd::hyperbolicity
