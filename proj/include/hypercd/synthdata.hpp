#pragma once

#include <cstdint>
#include <vector>

#include "hypercd/types.hpp"

namespace hypercd::synth {

/// Controls the hierarchical prototype tree and the pair sampler. Pairs are
/// vectors standing in for embeddings: "no change" pairs share one leaf
/// prototype and one nuisance offset (which cancels in the pair difference),
/// "change" pairs mix two leaves with independent nuisance.
struct HierarchySpec {
  int depth = 3;
  int branching = 3;
  int dim = 16;
  double class_sep = 1.0;
  double nuisance_strength = 0.5;
  double noise_std = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
  int leaf_count() const;
};

inline constexpr double kDefaultChangeFraction = 0.72;

struct GeneratedDataset {
  std::vector<PairSample> train;
  std::vector<PairSample> test;
  double change_fraction = kDefaultChangeFraction;
};

/// Leaf prototypes of a rooted tree of the given depth: each child adds a
/// Gaussian offset of scale class_sep/level to its parent, root at the
/// origin. Fully determined by spec.seed.
std::vector<Vec> build_state_tree(const HierarchySpec& spec);

/// Draws `count` labeled pairs with exactly lround(count*change_fraction)
/// change labels. `stream` separates train/test draws under one seed.
std::vector<PairSample> sample_pairs(const std::vector<Vec>& prototypes,
                                     const HierarchySpec& spec, int count,
                                     double change_fraction = kDefaultChangeFraction,
                                     std::uint64_t stream = 1);

GeneratedDataset generate(const HierarchySpec& spec, int train_count,
                          int test_count,
                          double change_fraction = kDefaultChangeFraction);

namespace detail {
/// Pair construction primitives; the shared-offset cancellation of no-change
/// pairs is exact by construction.
PairSample make_no_change_pair(const Vec& prototype, const Vec& noise1,
                               const Vec& noise2, const Vec& nuisance);
PairSample make_change_pair(const Vec& prototype1, const Vec& prototype2,
                            const Vec& noise1, const Vec& noise2,
                            const Vec& nuisance1, const Vec& nuisance2);
}  // namespace detail

}  // namespace hypercd::synth
