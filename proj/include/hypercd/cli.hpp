#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace hypercd::cli {

// Stable exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFormat = 2;           // input format / usage
inline constexpr int kExitDegenerateInput = 3;  // degenerate geometry
inline constexpr int kExitDegenerateLabels = 4;
inline constexpr int kExitShapeMismatch = 5;

struct DeltaArgs {
  std::string input;
  std::string metric = "euclidean";
  double curvature = 1.0;
  int base_index = 0;
  int sample_size = 0;  // 0 = exact mode
  int trials = 10;
  std::uint64_t seed = 42;
  bool relative = false;
  bool json = false;
};

struct GenArgs {
  std::string config;  // empty = defaults
  std::string out_train;
  std::string out_test;
};

struct TrainArgs {
  std::string config;  // empty = defaults
  std::string train;
  std::string model_out;
  std::string history_out;  // empty = model_out + ".history.csv"
  std::string mode = "hyperbolic";
};

struct EvalArgs {
  std::string model;
  std::string data;
  double threshold = 0.5;
  bool json = false;
};

/// Subcommand bodies. They write reports to `out`, diagnostics to `err`,
/// and return one of the exit codes above; nothing here calls exit().
int run_delta(const DeltaArgs& args, std::ostream& out, std::ostream& err);
int run_gen(const GenArgs& args, std::ostream& out, std::ostream& err);
int run_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);

}  // namespace hypercd::cli
