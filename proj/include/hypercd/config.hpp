#pragma once

#include <iosfwd>
#include <string>

#include "hypercd/siamese.hpp"
#include "hypercd/synthdata.hpp"

namespace hypercd::io {

/// Everything the generator and trainer read from one config file. Every
/// key is optional; the defaults below are the toolkit defaults.
struct RunConfig {
  synth::HierarchySpec hierarchy;
  int train_count = 2000;
  int test_count = 1000;
  double change_fraction = synth::kDefaultChangeFraction;
  siamese::TrainConfig train;
};

/// Flat `key=value` lines, `#` starts a comment, blank lines ignored. Keys
/// mirror the HierarchySpec / TrainConfig field names (plus train_count,
/// test_count, change_fraction); `seed` sets both the data and training
/// seeds. Unknown keys raise FormatError.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_file(const std::string& path);

}  // namespace hypercd::io
