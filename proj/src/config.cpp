#include "hypercd/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hypercd/io.hpp"

namespace hypercd::io {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw FormatError("config key '" + key + "': bad number '" + value + "'");
  }
  return v;
}

int to_int(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw FormatError("config key '" + key + "': bad integer '" + value +
                      "'");
  }
  return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw FormatError("config key '" + key + "': bad integer '" + value +
                      "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") {
    return true;
  }
  if (value == "false" || value == "0") {
    return false;
  }
  throw FormatError("config key '" + key + "': bad boolean '" + value + "'");
}

std::vector<int> to_int_list(const std::string& key,
                             const std::string& value) {
  std::vector<int> items;
  std::istringstream stream(value);
  std::string token;
  while (std::getline(stream, token, ',')) {
    items.push_back(to_int(key, trim(token)));
  }
  if (items.empty()) {
    throw FormatError("config key '" + key + "': empty list");
  }
  return items;
}

void apply(RunConfig& config, const std::string& key,
           const std::string& value) {
  if (key == "depth") {
    config.hierarchy.depth = to_int(key, value);
  } else if (key == "branching") {
    config.hierarchy.branching = to_int(key, value);
  } else if (key == "dim") {
    config.hierarchy.dim = to_int(key, value);
  } else if (key == "class_sep") {
    config.hierarchy.class_sep = to_double(key, value);
  } else if (key == "nuisance_strength") {
    config.hierarchy.nuisance_strength = to_double(key, value);
  } else if (key == "noise_std") {
    config.hierarchy.noise_std = to_double(key, value);
  } else if (key == "train_count") {
    config.train_count = to_int(key, value);
  } else if (key == "test_count") {
    config.test_count = to_int(key, value);
  } else if (key == "change_fraction") {
    config.change_fraction = to_double(key, value);
  } else if (key == "curvature") {
    config.train.curvature = to_double(key, value);
  } else if (key == "embed_dim") {
    config.train.embed_dim = to_int(key, value);
  } else if (key == "ball_dim") {
    config.train.ball_dim = to_int(key, value);
  } else if (key == "clip_radius") {
    config.train.clip_radius = to_double(key, value);
  } else if (key == "hidden") {
    config.train.hidden = to_int_list(key, value);
  } else if (key == "epochs") {
    config.train.epochs = to_int(key, value);
  } else if (key == "batch_size") {
    config.train.batch_size = to_int(key, value);
  } else if (key == "lr_encoder") {
    config.train.lr_encoder = to_double(key, value);
  } else if (key == "lr_fc") {
    config.train.lr_fc = to_double(key, value);
  } else if (key == "lr_head") {
    config.train.lr_head = to_double(key, value);
  } else if (key == "lr_decay_factor") {
    config.train.lr_decay_factor = to_double(key, value);
  } else if (key == "lr_decay_every") {
    config.train.lr_decay_every = to_int(key, value);
  } else if (key == "weight_decay") {
    config.train.weight_decay = to_double(key, value);
  } else if (key == "optimizer") {
    try {
      config.train.optimizer = siamese::optimizer_from_string(value);
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("config key 'optimizer': ") + e.what());
    }
  } else if (key == "momentum") {
    config.train.momentum = to_double(key, value);
  } else if (key == "signed_change_feature") {
    config.train.signed_change_feature = to_bool(key, value);
  } else if (key == "seed") {
    const std::uint64_t seed = to_u64(key, value);
    config.hierarchy.seed = seed;
    config.train.seed = seed;
  } else {
    throw FormatError("unknown config key '" + key + "'");
  }
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError("config line " + std::to_string(line_no) +
                        ": expected key=value, got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw FormatError("config line " + std::to_string(line_no) +
                        ": empty key");
    }
    apply(config, key, value);
  }
  return config;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open " + path);
  }
  return parse_config(in);
}

}  // namespace hypercd::io
