#include "hypercd/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

namespace hypercd::hyperbolicity {

namespace {

void require_points(const std::vector<Vec>& points, Index base_index) {
  if (points.size() < 2) {
    throw std::invalid_argument("need at least 2 points, got " +
                                std::to_string(points.size()));
  }
  if (base_index < 0 || base_index >= static_cast<Index>(points.size())) {
    throw std::invalid_argument("base index out of range");
  }
  const Index dim = points.front().size();
  for (const Vec& p : points) {
    if (p.size() != dim) {
      throw std::invalid_argument("points must share dimension");
    }
  }
}

double metric_distance(const Vec& x, const Vec& y, const MetricChoice& metric) {
  if (metric.kind == MetricChoice::Kind::kEuclidean) {
    return (x - y).norm();
  }
  return ball::distance(ball::project_to_ball(x, metric.curvature),
                        ball::project_to_ball(y, metric.curvature));
}

}  // namespace

MetricChoice MetricChoice::euclidean() {
  return MetricChoice{Kind::kEuclidean, ball::Curvature(1.0)};
}

MetricChoice MetricChoice::poincare(ball::Curvature curvature) {
  if (curvature.value() <= 0.0) {
    throw std::domain_error("poincare metric requires c > 0");
  }
  return MetricChoice{Kind::kPoincare, curvature};
}

double gromov_product(const Vec& x, const Vec& y, const Vec& z,
                      const MetricChoice& metric) {
  if (x.size() != y.size() || x.size() != z.size()) {
    throw std::invalid_argument("points must share dimension");
  }
  return 0.5 * (metric_distance(x, y, metric) + metric_distance(x, z, metric) -
                metric_distance(y, z, metric));
}

Mat pairwise_distances(const std::vector<Vec>& points,
                       const MetricChoice& metric) {
  const Index n = static_cast<Index>(points.size());
  Mat distances = Mat::Zero(n, n);
  if (metric.kind == MetricChoice::Kind::kPoincare) {
    // Project once, then measure; repeated projection inside the distance
    // loop would be quadratic in wasted work.
    std::vector<ball::BallPoint> projected;
    projected.reserve(points.size());
    for (const Vec& p : points) {
      projected.push_back(ball::project_to_ball(p, metric.curvature));
    }
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double d = ball::distance(projected[i], projected[j]);
        distances(i, j) = d;
        distances(j, i) = d;
      }
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        const double d = (points[i] - points[j]).norm();
        distances(i, j) = d;
        distances(j, i) = d;
      }
    }
  }
  return distances;
}

GromovMatrix gromov_matrix_from_distances(const Mat& distances,
                                          Index base_index) {
  if (distances.rows() != distances.cols() || distances.rows() < 2) {
    throw std::invalid_argument("distance matrix must be square, n >= 2");
  }
  if (base_index < 0 || base_index >= distances.rows()) {
    throw std::invalid_argument("base index out of range");
  }
  const Index n = distances.rows();
  GromovMatrix gm;
  gm.base_index = base_index;
  gm.a = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double prod = 0.5 * (distances(base_index, i) +
                                 distances(base_index, j) - distances(i, j));
      gm.a(i, j) = prod;
      gm.a(j, i) = prod;
    }
  }
  return gm;
}

GromovMatrix gromov_matrix(const std::vector<Vec>& points, Index base_index,
                           const MetricChoice& metric) {
  require_points(points, base_index);
  return gromov_matrix_from_distances(pairwise_distances(points, metric),
                                      base_index);
}

Mat minmax_product(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("min-max product shape mismatch");
  }
  const Index rows = a.rows();
  const Index cols = b.cols();
  const Index inner = a.cols();
  const Mat bt = b.transpose();  // row access on both operands
  Mat out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      for (Index k = 0; k < inner; ++k) {
        best = std::max(best, std::min(a(i, k), bt(j, k)));
      }
      out(i, j) = best;
    }
  }
  return out;
}

double delta_from_distances(const Mat& distances, Index base_index) {
  const GromovMatrix gm = gromov_matrix_from_distances(distances, base_index);
  const Mat product = minmax_product(gm.a, gm.a);
  return (product - gm.a).maxCoeff();
}

double delta(const std::vector<Vec>& points, Index base_index,
             const MetricChoice& metric) {
  require_points(points, base_index);
  return delta_from_distances(pairwise_distances(points, metric), base_index);
}

double relative_delta_from_distances(const Mat& distances, Index base_index) {
  const double diam = distances.maxCoeff();
  if (diam <= 0.0) {
    throw std::domain_error("relative delta undefined: zero diameter");
  }
  return 2.0 * delta_from_distances(distances, base_index) / diam;
}

double relative_delta(const std::vector<Vec>& points, Index base_index,
                      const MetricChoice& metric) {
  require_points(points, base_index);
  return relative_delta_from_distances(pairwise_distances(points, metric),
                                       base_index);
}

SampledDelta delta_sampled(const std::vector<Vec>& points, int sample_size,
                           int trials, std::uint64_t seed,
                           const MetricChoice& metric) {
  require_points(points, 0);
  const int n = static_cast<int>(points.size());
  if (sample_size < 4) {
    throw std::invalid_argument("sample size must be >= 4");
  }
  if (sample_size > n) {
    throw std::invalid_argument("sample size exceeds point count");
  }
  if (trials < 1) {
    throw std::invalid_argument("need at least one trial");
  }

  std::vector<double> abs_values(trials);
  std::vector<double> rel_values(trials);
  std::vector<int> indices(n);
  for (int trial = 0; trial < trials; ++trial) {
    auto rng = make_rng(seed, static_cast<std::uint64_t>(trial));
    std::iota(indices.begin(), indices.end(), 0);
    // Partial Fisher-Yates; the first drawn index doubles as the base point.
    for (int i = 0; i < sample_size; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(indices[i], indices[pick(rng)]);
    }
    std::vector<Vec> sample;
    sample.reserve(sample_size);
    for (int i = 0; i < sample_size; ++i) {
      sample.push_back(points[indices[i]]);
    }
    const Mat distances = pairwise_distances(sample, metric);
    abs_values[trial] = delta_from_distances(distances, 0);
    rel_values[trial] = relative_delta_from_distances(distances, 0);
  }

  auto mean_std = [](const std::vector<double>& values) {
    const double mean =
        std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double var = 0.0;
    for (double v : values) {
      var += (v - mean) * (v - mean);
    }
    return std::pair<double, double>(mean, std::sqrt(var / values.size()));
  };

  SampledDelta out;
  out.sample_size = sample_size;
  out.trials = trials;
  std::tie(out.delta_mean, out.delta_std) = mean_std(abs_values);
  std::tie(out.relative_mean, out.relative_std) = mean_std(rel_values);
  return out;
}

}  // namespace hypercd::hyperbolicity
