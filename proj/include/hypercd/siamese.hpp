#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hypercd/hyp_layers.hpp"
#include "hypercd/types.hpp"

namespace hypercd::siamese {

/// Weight-tied fully connected encoder: affine + tanh at every layer.
struct EncoderParams {
  std::vector<Mat> weights;  // layer l maps dims[l] -> dims[l+1], shape (out, in)
  std::vector<Vec> biases;

  /// dims = [input, hidden..., embedding]; Glorot-normal weights, zero biases.
  static EncoderParams initialized(const std::vector<int>& dims,
                                   std::mt19937_64& rng);

  Index input_dim() const { return weights.front().cols(); }
  Index embedding_dim() const { return weights.back().rows(); }
};

Vec encode(const Vec& x, const EncoderParams& encoder);

/// Elementwise |e1 - e2| (or the signed difference when signed_diff is set).
Vec change_feature(const Vec& e1, const Vec& e2, bool signed_diff = false);

/// Scalar pair distance ||e1 - e2||; diagnostic only, not on the
/// classification path.
double euclidean_pair_distance(const Vec& e1, const Vec& e2);

enum class HeadMode { kHyperbolic, kEuclidean };

std::string to_string(HeadMode mode);
HeadMode head_mode_from_string(const std::string& name);

/// Linear two-class baseline over the fc output.
struct EuclideanHead {
  std::array<Vec, 2> w;
  std::array<double, 2> b{0.0, 0.0};

  static EuclideanHead initialized(Index dim, std::mt19937_64& rng);
};

struct HeadParams {
  Mat fc_weight;  // (ball_dim, embedding_dim)
  Vec fc_bias;
  hyplayers::HypHead hyp;
  EuclideanHead euc;
  hyplayers::ClipRadius clip{hyplayers::kDefaultClipRadius};
  ball::Curvature curvature{1.0};
  HeadMode mode = HeadMode::kHyperbolic;
};

struct Model {
  EncoderParams encoder;
  HeadParams head;
  bool signed_change_feature = false;
};

enum class OptimizerKind { kAdamW, kSgdMomentum };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);

struct TrainConfig {
  double curvature = 1.0;
  int embed_dim = 16;
  int ball_dim = 8;
  double clip_radius = hyplayers::kDefaultClipRadius;
  std::vector<int> hidden = {64, 64};
  int epochs = 30;
  int batch_size = 128;
  std::uint64_t seed = 42;
  // Per-group learning rates; the encoder takes the smallest one, the fc
  // layer the middle one, and the classification head the largest.
  double lr_encoder = 1e-6;
  double lr_fc = 1e-3;
  double lr_head = 0.1;
  double lr_decay_factor = 0.1;
  int lr_decay_every = 10;  // epochs
  double weight_decay = 0.01;
  OptimizerKind optimizer = OptimizerKind::kAdamW;
  double momentum = 0.9;
  bool signed_change_feature = false;
};

/// Builds a freshly initialized model for the given input dimension. The
/// draw order (encoder, fc, hyperbolic head, euclidean head) is fixed, so
/// both head modes share identical encoder and fc initializations for one
/// seed.
Model init_model(int input_dim, const TrainConfig& config, HeadMode mode);

/// Probability of "change" for one pair.
double forward(const PairSample& sample, const Model& model);

/// Gradient container shaped exactly like the trainable part of a Model.
struct ModelGrads {
  std::vector<Mat> enc_weights;
  std::vector<Vec> enc_biases;
  Mat fc_weight;
  Vec fc_bias;
  std::array<Vec, 2> hyp_p_raw;
  std::array<Vec, 2> hyp_t;
  std::array<Vec, 2> euc_w;
  std::array<double, 2> euc_b{0.0, 0.0};

  static ModelGrads zeros_like(const Model& model);
};

struct BatchResult {
  double loss = 0.0;
  ModelGrads grads;
};

/// Mean loss over the batch and reverse-mode gradients for every trainable
/// parameter of the active head mode.
BatchResult loss_and_grads(const std::vector<PairSample>& batch,
                           const Model& model);

enum class ParamGroup { kEncoder, kFc, kHead };

/// Flat view of one named parameter tensor; `data` aliases the model (or
/// gradient) storage directly.
struct ParamRef {
  std::string name;
  double* data = nullptr;
  Index size = 0;
  Index rows = 0;
  Index cols = 0;  // 0 for vectors and scalars
  ParamGroup group = ParamGroup::kEncoder;
  bool decay = true;
};

/// Trainable parameters of the active head mode, in a fixed order shared
/// with param_refs(ModelGrads&, ...).
std::vector<ParamRef> param_refs(Model& model);
std::vector<ParamRef> param_refs(ModelGrads& grads, const Model& model);

struct EpochStats {
  int epoch = 0;  // 1-based
  double loss = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
};

/// Full training loop: seeded init, seeded shuffling, per-group learning
/// rates with step decay, AdamW by default. History row k holds the mean
/// batch loss of epoch k and accuracy/F1 of the full training set evaluated
/// with the end-of-epoch parameters.
TrainResult train(const std::vector<PairSample>& dataset,
                  const TrainConfig& config, HeadMode mode);

struct EvalMetrics {
  double accuracy = 0.0;
  double f1 = 0.0;
};

/// Accuracy and F1 ("change" positive) of thresholded predictions.
EvalMetrics binary_metrics(const std::vector<int>& predictions,
                           const std::vector<int>& labels);
EvalMetrics evaluate(const std::vector<PairSample>& dataset,
                     const Model& model, double threshold = 0.5);

}  // namespace hypercd::siamese
