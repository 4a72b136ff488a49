#include <iostream>

#include <CLI11.hpp>

#include "hypercd/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"hypercd: hyperbolic change-detection toolkit"};
  app.require_subcommand(1);

  hypercd::cli::DeltaArgs delta_args;
  CLI::App* delta = app.add_subcommand(
      "delta", "Estimate delta-hyperbolicity of an embedding CSV");
  delta->add_option("--input", delta_args.input, "embedding CSV")->required();
  delta->add_option("--metric", delta_args.metric, "euclidean|poincare")
      ->check(CLI::IsMember({"euclidean", "poincare"}));
  delta->add_option("--curvature", delta_args.curvature,
                    "ball curvature for --metric poincare");
  delta->add_option("--base-index", delta_args.base_index,
                    "base point row (exact mode)");
  delta->add_option("--sample-size", delta_args.sample_size,
                    "points per trial; enables sampled mode");
  delta->add_option("--trials", delta_args.trials, "sampled-mode trials");
  delta->add_option("--seed", delta_args.seed, "sampled-mode seed");
  delta->add_flag("--relative", delta_args.relative,
                  "also report 2*delta/diameter");
  delta->add_flag("--json", delta_args.json, "machine-readable output");

  hypercd::cli::GenArgs gen_args;
  CLI::App* gen =
      app.add_subcommand("gen", "Generate synthetic change-detection pairs");
  gen->add_option("--config", gen_args.config, "key=value config file");
  gen->add_option("--out-train", gen_args.out_train, "train pair CSV")
      ->required();
  gen->add_option("--out-test", gen_args.out_test, "test pair CSV")
      ->required();

  hypercd::cli::TrainArgs train_args;
  CLI::App* train =
      app.add_subcommand("train", "Train a Siamese change-detection model");
  train->add_option("--config", train_args.config, "key=value config file");
  train->add_option("--train", train_args.train, "training pair CSV")
      ->required();
  train->add_option("--model-out", train_args.model_out, "model output path")
      ->required();
  train->add_option("--history-out", train_args.history_out,
                    "history CSV path (default: <model-out>.history.csv)");
  train->add_option("--mode", train_args.mode, "hyperbolic|euclidean")
      ->check(CLI::IsMember({"hyperbolic", "euclidean"}));

  hypercd::cli::EvalArgs eval_args;
  CLI::App* eval =
      app.add_subcommand("eval", "Evaluate a model on a pair CSV");
  eval->add_option("--model", eval_args.model, "model file")->required();
  eval->add_option("--data", eval_args.data, "pair CSV")->required();
  eval->add_option("--threshold", eval_args.threshold,
                   "decision threshold on P(change)");
  eval->add_flag("--json", eval_args.json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hypercd::cli::kExitFormat;
  }

  if (delta->parsed()) {
    return hypercd::cli::run_delta(delta_args, std::cout, std::cerr);
  }
  if (gen->parsed()) {
    return hypercd::cli::run_gen(gen_args, std::cout, std::cerr);
  }
  if (train->parsed()) {
    return hypercd::cli::run_train(train_args, std::cout, std::cerr);
  }
  if (eval->parsed()) {
    return hypercd::cli::run_eval(eval_args, std::cout, std::cerr);
  }
  return hypercd::cli::kExitFormat;
}
