#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace hypercd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

/// One labeled observation pair: label 1 = change, 0 = no change.
struct PairSample {
  Vec x1;
  Vec x2;
  int label = 0;
};

/// Deterministic engine for a (seed, stream) pair. Distinct streams drawn
/// from one seed are independent and schedule-free.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace hypercd
