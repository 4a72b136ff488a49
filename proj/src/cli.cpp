#include "hypercd/cli.hpp"

#include <exception>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "hypercd/config.hpp"
#include "hypercd/hyperbolicity.hpp"
#include "hypercd/io.hpp"
#include "hypercd/siamese.hpp"
#include "hypercd/synthdata.hpp"
#include "hypercd/types.hpp"

namespace hypercd::cli {

namespace {

using nlohmann::json;

// Exact computation is O(n^2) memory and O(n^3) time; larger inputs must be
// subsampled.
constexpr Index kExactDeltaLimit = 2000;

int fail(std::ostream& err, int code, const std::string& message) {
  err << "error: " << message << "\n";
  return code;
}

std::vector<Vec> matrix_rows(const Mat& m) {
  std::vector<Vec> rows;
  rows.reserve(m.rows());
  for (Index i = 0; i < m.rows(); ++i) {
    rows.push_back(m.row(i).transpose());
  }
  return rows;
}

}  // namespace

int run_delta(const DeltaArgs& args, std::ostream& out, std::ostream& err) {
  hyperbolicity::MetricChoice metric;
  if (args.metric == "euclidean") {
    metric = hyperbolicity::MetricChoice::euclidean();
  } else if (args.metric == "poincare") {
    if (args.curvature <= 0.0) {
      return fail(err, kExitFormat, "poincare metric needs --curvature > 0");
    }
    metric = hyperbolicity::MetricChoice::poincare(
        ball::Curvature(args.curvature));
  } else {
    return fail(err, kExitFormat, "unknown metric '" + args.metric + "'");
  }

  io::EmbeddingData data;
  try {
    data = io::read_embeddings_file(args.input);
  } catch (const io::FormatError& e) {
    return fail(err, kExitFormat, e.what());
  }
  const Index n = data.vectors.rows();
  if (n < 2) {
    return fail(err, kExitDegenerateInput,
                "need at least 2 points, got " + std::to_string(n));
  }
  const std::vector<Vec> points = matrix_rows(data.vectors);

  json report;
  report["n"] = n;
  report["metric"] = args.metric;
  report["curvature"] =
      metric.kind == hyperbolicity::MetricChoice::Kind::kPoincare
          ? args.curvature
          : 0.0;
  report["seed"] = args.seed;

  if (args.sample_size > 0) {
    hyperbolicity::SampledDelta sampled;
    try {
      sampled = hyperbolicity::delta_sampled(points, args.sample_size,
                                             args.trials, args.seed, metric);
    } catch (const std::invalid_argument& e) {
      return fail(err, kExitFormat, e.what());
    } catch (const std::domain_error& e) {
      return fail(err, kExitDegenerateInput, e.what());
    }
    report["sampled"] = true;
    report["trials"] = sampled.trials;
    report["sample_size"] = sampled.sample_size;
    report["delta"] = sampled.delta_mean;
    report["delta_std"] = sampled.delta_std;
    report["relative_delta"] = sampled.relative_mean;
    report["relative_delta_std"] = sampled.relative_std;
    if (args.json) {
      out << report.dump() << "\n";
    } else {
      out << "delta_mean=" << io::format_g6(sampled.delta_mean)
          << " delta_std=" << io::format_g6(sampled.delta_std)
          << " relative_delta_mean=" << io::format_g6(sampled.relative_mean)
          << " relative_delta_std=" << io::format_g6(sampled.relative_std)
          << "\n";
    }
    return kExitOk;
  }

  if (n > kExactDeltaLimit) {
    return fail(err, kExitFormat,
                "input has " + std::to_string(n) + " rows (limit " +
                    std::to_string(kExactDeltaLimit) +
                    " for exact mode); pass --sample-size");
  }
  if (args.base_index < 0 || args.base_index >= n) {
    return fail(err, kExitFormat,
                "--base-index out of range [0, " + std::to_string(n - 1) +
                    "]");
  }

  const Mat distances = hyperbolicity::pairwise_distances(points, metric);
  const double dvalue =
      hyperbolicity::delta_from_distances(distances, args.base_index);
  const double diameter = distances.maxCoeff();

  report["sampled"] = false;
  report["trials"] = 0;
  report["delta"] = dvalue;
  if (args.relative && diameter <= 0.0) {
    return fail(err, kExitDegenerateInput,
                "zero diameter: all points coincide");
  }
  if (diameter > 0.0) {
    report["relative_delta"] = 2.0 * dvalue / diameter;
  } else {
    report["relative_delta"] = nullptr;
  }

  if (args.json) {
    out << report.dump() << "\n";
  } else {
    out << "delta=" << io::format_g6(dvalue);
    if (args.relative) {
      out << " relative_delta=" << io::format_g6(2.0 * dvalue / diameter);
    }
    out << "\n";
  }
  return kExitOk;
}

int run_gen(const GenArgs& args, std::ostream& out, std::ostream& err) {
  io::RunConfig config;
  try {
    if (!args.config.empty()) {
      config = io::parse_config_file(args.config);
    }
  } catch (const io::FormatError& e) {
    return fail(err, kExitFormat, e.what());
  }

  synth::GeneratedDataset dataset;
  try {
    dataset = synth::generate(config.hierarchy, config.train_count,
                              config.test_count, config.change_fraction);
  } catch (const std::invalid_argument& e) {
    return fail(err, kExitFormat, e.what());
  }

  try {
    io::write_pairs_file(args.out_train, dataset.train);
    io::write_pairs_file(args.out_test, dataset.test);
  } catch (const io::FormatError& e) {
    return fail(err, kExitFormat, e.what());
  }

  out << "train_rows=" << dataset.train.size()
      << " test_rows=" << dataset.test.size()
      << " change_fraction=" << io::format_g6(dataset.change_fraction)
      << "\n";
  return kExitOk;
}

int run_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  io::RunConfig config;
  try {
    if (!args.config.empty()) {
      config = io::parse_config_file(args.config);
    }
  } catch (const io::FormatError& e) {
    return fail(err, kExitFormat, e.what());
  }

  siamese::HeadMode mode;
  try {
    mode = siamese::head_mode_from_string(args.mode);
  } catch (const std::invalid_argument& e) {
    return fail(err, kExitFormat, e.what());
  }

  std::vector<PairSample> dataset;
  try {
    dataset = io::read_pairs_file(args.train);
  } catch (const io::FormatError& e) {
    return fail(err, kExitFormat, e.what());
  }
  if (dataset.empty()) {
    return fail(err, kExitDegenerateInput, "training file has no rows");
  }
  bool has_change = false;
  bool has_no_change = false;
  for (const PairSample& sample : dataset) {
    (sample.label == 1 ? has_change : has_no_change) = true;
  }
  if (!has_change || !has_no_change) {
    return fail(err, kExitDegenerateLabels,
                "training data must contain both labels");
  }

  siamese::TrainResult result;
  try {
    result = siamese::train(dataset, config.train, mode);
  } catch (const std::invalid_argument& e) {
    return fail(err, kExitFormat, e.what());
  }

  const std::string history_path = args.history_out.empty()
                                       ? args.model_out + ".history.csv"
                                       : args.history_out;
  try {
    io::save_model_file(args.model_out, result.model);
    io::write_history_file(history_path, result.history);
  } catch (const io::FormatError& e) {
    return fail(err, kExitFormat, e.what());
  }

  const siamese::EpochStats& last = result.history.back();
  out << "epochs=" << result.history.size()
      << " final_loss=" << io::format_g6(last.loss)
      << " final_accuracy=" << io::format_f4(last.accuracy)
      << " final_f1=" << io::format_f4(last.f1) << "\n";
  return kExitOk;
}

int run_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  siamese::Model model;
  try {
    model = io::load_model_file(args.model);
  } catch (const io::FormatError& e) {
    return fail(err, kExitFormat, e.what());
  }

  std::vector<PairSample> dataset;
  try {
    dataset = io::read_pairs_file(args.data);
  } catch (const io::FormatError& e) {
    return fail(err, kExitFormat, e.what());
  }
  if (dataset.empty()) {
    return fail(err, kExitDegenerateInput, "evaluation file has no rows");
  }
  if (dataset.front().x1.size() != model.encoder.input_dim()) {
    return fail(err, kExitShapeMismatch,
                "data dimension " + std::to_string(dataset.front().x1.size()) +
                    " does not match model input dimension " +
                    std::to_string(model.encoder.input_dim()));
  }

  const siamese::EvalMetrics metrics =
      siamese::evaluate(dataset, model, args.threshold);
  if (args.json) {
    json report;
    report["accuracy"] = metrics.accuracy;
    report["f1"] = metrics.f1;
    report["n"] = dataset.size();
    report["threshold"] = args.threshold;
    out << report.dump() << "\n";
  } else {
    out << "accuracy=" << io::format_f4(metrics.accuracy)
        << " f1=" << io::format_f4(metrics.f1) << "\n";
  }
  return kExitOk;
}

}  // namespace hypercd::cli
