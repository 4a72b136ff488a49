#include "hypercd/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hypercd::synth {

namespace {

Vec gaussian_vec(int dim, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) {
    v[i] = gauss(rng) * scale;
  }
  return v;
}

/// Random direction scaled by uniform[0, strength). The draw count does not
/// depend on `strength`, so datasets generated from one seed stay aligned
/// across nuisance settings.
Vec nuisance_vec(int dim, double strength, std::mt19937_64& rng) {
  Vec dir = gaussian_vec(dim, 1.0, rng);
  const double norm = dir.norm();
  std::uniform_real_distribution<double> mag(0.0, 1.0);
  const double magnitude = mag(rng) * strength;
  if (norm == 0.0) {
    return Vec::Zero(dim);
  }
  return (magnitude / norm) * dir;
}

}  // namespace

void HierarchySpec::validate() const {
  if (depth < 1) {
    throw std::invalid_argument("depth must be >= 1");
  }
  if (branching < 2) {
    throw std::invalid_argument("branching must be >= 2");
  }
  if (dim < 1) {
    throw std::invalid_argument("dim must be >= 1");
  }
  if (!(class_sep > 0.0) || !std::isfinite(class_sep)) {
    throw std::invalid_argument("class_sep must be finite and > 0");
  }
  if (nuisance_strength < 0.0 || !std::isfinite(nuisance_strength)) {
    throw std::invalid_argument("nuisance_strength must be finite and >= 0");
  }
  if (noise_std < 0.0 || !std::isfinite(noise_std)) {
    throw std::invalid_argument("noise_std must be finite and >= 0");
  }
}

int HierarchySpec::leaf_count() const {
  int count = 1;
  for (int level = 0; level < depth; ++level) {
    count *= branching;
  }
  return count;
}

std::vector<Vec> build_state_tree(const HierarchySpec& spec) {
  spec.validate();
  auto rng = make_rng(spec.seed, 0);

  // Breadth-first expansion; only the current level is kept.
  std::vector<Vec> level_nodes{Vec::Zero(spec.dim)};
  for (int level = 1; level <= spec.depth; ++level) {
    const double scale = spec.class_sep / static_cast<double>(level);
    std::vector<Vec> next;
    next.reserve(level_nodes.size() * spec.branching);
    for (const Vec& parent : level_nodes) {
      for (int child = 0; child < spec.branching; ++child) {
        next.push_back(parent + gaussian_vec(spec.dim, scale, rng));
      }
    }
    level_nodes = std::move(next);
  }
  return level_nodes;
}

namespace detail {

PairSample make_no_change_pair(const Vec& prototype, const Vec& noise1,
                               const Vec& noise2, const Vec& nuisance) {
  return PairSample{prototype + noise1 + nuisance,
                    prototype + noise2 + nuisance, 0};
}

PairSample make_change_pair(const Vec& prototype1, const Vec& prototype2,
                            const Vec& noise1, const Vec& noise2,
                            const Vec& nuisance1, const Vec& nuisance2) {
  return PairSample{prototype1 + noise1 + nuisance1,
                    prototype2 + noise2 + nuisance2, 1};
}

}  // namespace detail

std::vector<PairSample> sample_pairs(const std::vector<Vec>& prototypes,
                                     const HierarchySpec& spec, int count,
                                     double change_fraction,
                                     std::uint64_t stream) {
  spec.validate();
  if (count < 1) {
    throw std::invalid_argument("pair count must be >= 1");
  }
  if (change_fraction < 0.0 || change_fraction > 1.0) {
    throw std::invalid_argument("change fraction must be in [0, 1]");
  }
  const int n_protos = static_cast<int>(prototypes.size());
  const int n_change =
      static_cast<int>(std::lround(count * change_fraction));
  if (n_change > 0 && n_protos < 2) {
    throw std::invalid_argument("change pairs need at least 2 prototypes");
  }
  if (n_protos < 1) {
    throw std::invalid_argument("need at least one prototype");
  }

  auto rng = make_rng(spec.seed, stream);
  std::uniform_int_distribution<int> pick(0, n_protos - 1);

  std::vector<PairSample> pairs;
  pairs.reserve(count);
  for (int i = 0; i < count; ++i) {
    if (i < n_change) {
      const int a = pick(rng);
      int b = pick(rng);
      while (b == a) {
        b = pick(rng);
      }
      const Vec noise1 = gaussian_vec(spec.dim, spec.noise_std, rng);
      const Vec noise2 = gaussian_vec(spec.dim, spec.noise_std, rng);
      const Vec nu1 = nuisance_vec(spec.dim, spec.nuisance_strength, rng);
      const Vec nu2 = nuisance_vec(spec.dim, spec.nuisance_strength, rng);
      pairs.push_back(detail::make_change_pair(prototypes[a], prototypes[b],
                                               noise1, noise2, nu1, nu2));
    } else {
      const int a = pick(rng);
      const Vec noise1 = gaussian_vec(spec.dim, spec.noise_std, rng);
      const Vec noise2 = gaussian_vec(spec.dim, spec.noise_std, rng);
      const Vec nu = nuisance_vec(spec.dim, spec.nuisance_strength, rng);
      pairs.push_back(
          detail::make_no_change_pair(prototypes[a], noise1, noise2, nu));
    }
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  return pairs;
}

GeneratedDataset generate(const HierarchySpec& spec, int train_count,
                          int test_count, double change_fraction) {
  const std::vector<Vec> prototypes = build_state_tree(spec);
  GeneratedDataset data;
  data.change_fraction = change_fraction;
  data.train = sample_pairs(prototypes, spec, train_count, change_fraction, 1);
  data.test = sample_pairs(prototypes, spec, test_count, change_fraction, 2);
  return data;
}

}  // namespace hypercd::synth
