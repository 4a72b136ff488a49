#include "hypercd/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hypercd::siamese {

namespace {

constexpr std::uint64_t kInitStream = 10;
constexpr std::uint64_t kShuffleStream = 11;

Mat glorot_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = std::sqrt(2.0 / static_cast<double>(rows + cols));
  Mat w(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      w(i, j) = gauss(rng) * scale;
    }
  }
  return w;
}

struct EncoderCache {
  std::vector<Vec> activations;  // activations[0] = input, tanh outputs after
};

Vec encode_cached(const Vec& x, const EncoderParams& encoder,
                  EncoderCache* cache) {
  if (x.size() != encoder.input_dim()) {
    throw std::invalid_argument("encoder input dimension mismatch");
  }
  Vec a = x;
  if (cache != nullptr) {
    cache->activations.clear();
    cache->activations.push_back(a);
  }
  for (std::size_t l = 0; l < encoder.weights.size(); ++l) {
    a = ((encoder.weights[l] * a + encoder.biases[l]).array().tanh()).matrix();
    if (cache != nullptr) {
      cache->activations.push_back(a);
    }
  }
  return a;
}

/// Backpropagates dL/d(output) through the tanh chain, accumulating weight
/// and bias gradients; returns dL/d(input).
Vec encoder_backward(const EncoderCache& cache, const EncoderParams& encoder,
                     Vec grad_out, ModelGrads& grads) {
  for (int l = static_cast<int>(encoder.weights.size()) - 1; l >= 0; --l) {
    const Vec& act = cache.activations[l + 1];
    const Vec dpre =
        (grad_out.array() * (1.0 - act.array() * act.array())).matrix();
    grads.enc_weights[l].noalias() += dpre * cache.activations[l].transpose();
    grads.enc_biases[l] += dpre;
    grad_out = encoder.weights[l].transpose() * dpre;
  }
  return grad_out;
}

double stable_sigmoid(double d) {
  if (d >= 0.0) {
    return 1.0 / (1.0 + std::exp(-d));
  }
  const double e = std::exp(d);
  return e / (1.0 + e);
}

struct PairForward {
  EncoderCache cache1;
  EncoderCache cache2;
  Vec feature;  // change feature
  Vec z;        // fc output
  double prob = 0.0;
};

PairForward forward_cached(const PairSample& sample, const Model& model) {
  PairForward fw;
  const Vec e1 = encode_cached(sample.x1, model.encoder, &fw.cache1);
  const Vec e2 = encode_cached(sample.x2, model.encoder, &fw.cache2);
  fw.feature = change_feature(e1, e2, model.signed_change_feature);
  fw.z = model.head.fc_weight * fw.feature + model.head.fc_bias;

  if (model.head.mode == HeadMode::kHyperbolic) {
    const ball::BallPoint y = hyplayers::lift_to_ball(
        hyplayers::clip_features(fw.z, model.head.clip), model.head.curvature);
    fw.prob = hyplayers::hyp_blr_prob(y, model.head.hyp.lift(model.head.curvature));
  } else {
    const double l0 = model.head.euc.w[0].dot(fw.z) + model.head.euc.b[0];
    const double l1 = model.head.euc.w[1].dot(fw.z) + model.head.euc.b[1];
    fw.prob = std::clamp(stable_sigmoid(l1 - l0), hyplayers::kProbEps,
                         1.0 - hyplayers::kProbEps);
  }
  return fw;
}

}  // namespace

EncoderParams EncoderParams::initialized(const std::vector<int>& dims,
                                         std::mt19937_64& rng) {
  if (dims.size() < 2) {
    throw std::invalid_argument("encoder needs at least input and output dims");
  }
  EncoderParams enc;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    enc.weights.push_back(glorot_matrix(dims[l + 1], dims[l], rng));
    enc.biases.push_back(Vec::Zero(dims[l + 1]));
  }
  return enc;
}

Vec encode(const Vec& x, const EncoderParams& encoder) {
  return encode_cached(x, encoder, nullptr);
}

Vec change_feature(const Vec& e1, const Vec& e2, bool signed_diff) {
  if (e1.size() != e2.size()) {
    throw std::invalid_argument("change feature dimension mismatch");
  }
  if (signed_diff) {
    return e1 - e2;
  }
  return (e1 - e2).cwiseAbs();
}

double euclidean_pair_distance(const Vec& e1, const Vec& e2) {
  if (e1.size() != e2.size()) {
    throw std::invalid_argument("pair distance dimension mismatch");
  }
  return (e1 - e2).norm();
}

std::string to_string(HeadMode mode) {
  return mode == HeadMode::kHyperbolic ? "hyperbolic" : "euclidean";
}

HeadMode head_mode_from_string(const std::string& name) {
  if (name == "hyperbolic") {
    return HeadMode::kHyperbolic;
  }
  if (name == "euclidean") {
    return HeadMode::kEuclidean;
  }
  throw std::invalid_argument("unknown head mode: " + name);
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdamW ? "adamw" : "sgd";
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adamw") {
    return OptimizerKind::kAdamW;
  }
  if (name == "sgd") {
    return OptimizerKind::kSgdMomentum;
  }
  throw std::invalid_argument("unknown optimizer: " + name);
}

EuclideanHead EuclideanHead::initialized(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  EuclideanHead head;
  for (int k = 0; k < 2; ++k) {
    head.w[k] = Vec(dim);
    for (Index i = 0; i < dim; ++i) {
      head.w[k][i] = gauss(rng) * scale;
    }
    head.b[k] = 0.0;
  }
  return head;
}

Model init_model(int input_dim, const TrainConfig& config, HeadMode mode) {
  if (input_dim < 1) {
    throw std::invalid_argument("input dimension must be >= 1");
  }
  auto rng = make_rng(config.seed, kInitStream);

  std::vector<int> dims;
  dims.push_back(input_dim);
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(config.embed_dim);

  Model model;
  model.encoder = EncoderParams::initialized(dims, rng);
  model.head.fc_weight = glorot_matrix(config.ball_dim, config.embed_dim, rng);
  model.head.fc_bias = Vec::Zero(config.ball_dim);
  model.head.hyp = hyplayers::HypHead::initialized(config.ball_dim, rng);
  model.head.euc = EuclideanHead::initialized(config.ball_dim, rng);
  model.head.clip = hyplayers::ClipRadius(config.clip_radius);
  model.head.curvature = ball::Curvature(config.curvature);
  model.head.mode = mode;
  model.signed_change_feature = config.signed_change_feature;
  return model;
}

double forward(const PairSample& sample, const Model& model) {
  return forward_cached(sample, model).prob;
}

ModelGrads ModelGrads::zeros_like(const Model& model) {
  ModelGrads g;
  for (std::size_t l = 0; l < model.encoder.weights.size(); ++l) {
    g.enc_weights.push_back(Mat::Zero(model.encoder.weights[l].rows(),
                                      model.encoder.weights[l].cols()));
    g.enc_biases.push_back(Vec::Zero(model.encoder.biases[l].size()));
  }
  g.fc_weight =
      Mat::Zero(model.head.fc_weight.rows(), model.head.fc_weight.cols());
  g.fc_bias = Vec::Zero(model.head.fc_bias.size());
  for (int k = 0; k < 2; ++k) {
    g.hyp_p_raw[k] = Vec::Zero(model.head.hyp.p_raw[k].size());
    g.hyp_t[k] = Vec::Zero(model.head.hyp.t[k].size());
    g.euc_w[k] = Vec::Zero(model.head.euc.w[k].size());
    g.euc_b[k] = 0.0;
  }
  return g;
}

BatchResult loss_and_grads(const std::vector<PairSample>& batch,
                           const Model& model) {
  if (batch.empty()) {
    throw std::invalid_argument("batch must be nonempty");
  }

  BatchResult result;
  result.grads = ModelGrads::zeros_like(model);
  ModelGrads& grads = result.grads;

  for (const PairSample& sample : batch) {
    PairForward fw = forward_cached(sample, model);

    Vec dz;  // dL/d(fc output)
    if (model.head.mode == HeadMode::kHyperbolic) {
      const hyplayers::HeadGradients hg = hyplayers::head_gradients(
          fw.z, model.head.hyp, model.head.clip, model.head.curvature,
          sample.label);
      result.loss += hg.loss;
      dz = hg.dx;
      for (int k = 0; k < 2; ++k) {
        grads.hyp_p_raw[k] += hg.dp_raw[k];
        grads.hyp_t[k] += hg.dt[k];
      }
    } else {
      const double l0 = model.head.euc.w[0].dot(fw.z) + model.head.euc.b[0];
      const double l1 = model.head.euc.w[1].dot(fw.z) + model.head.euc.b[1];
      const double prob = std::clamp(stable_sigmoid(l1 - l0),
                                     hyplayers::kProbEps,
                                     1.0 - hyplayers::kProbEps);
      result.loss += hyplayers::hyp_bce_loss(prob, sample.label);
      const double ddelta = prob - static_cast<double>(sample.label);
      dz = ddelta * (model.head.euc.w[1] - model.head.euc.w[0]);
      grads.euc_w[1] += ddelta * fw.z;
      grads.euc_w[0] -= ddelta * fw.z;
      grads.euc_b[1] += ddelta;
      grads.euc_b[0] -= ddelta;
    }

    grads.fc_weight.noalias() += dz * fw.feature.transpose();
    grads.fc_bias += dz;
    const Vec dfeature = model.head.fc_weight.transpose() * dz;

    Vec de1;
    Vec de2;
    if (model.signed_change_feature) {
      de1 = dfeature;
      de2 = -dfeature;
    } else {
      const Vec& e1 = fw.cache1.activations.back();
      const Vec& e2 = fw.cache2.activations.back();
      const Vec sign = (e1 - e2).array().sign().matrix();
      de1 = (dfeature.array() * sign.array()).matrix();
      de2 = -de1;
    }
    encoder_backward(fw.cache1, model.encoder, de1, grads);
    encoder_backward(fw.cache2, model.encoder, de2, grads);
  }

  const double inv = 1.0 / static_cast<double>(batch.size());
  result.loss *= inv;
  for (ParamRef& ref : param_refs(grads, model)) {
    for (Index i = 0; i < ref.size; ++i) {
      ref.data[i] *= inv;
    }
  }
  return result;
}

namespace {

ParamRef make_ref(const std::string& name, Mat& m, ParamGroup group,
                  bool decay) {
  return ParamRef{name, m.data(), m.size(), m.rows(), m.cols(), group, decay};
}

ParamRef make_ref(const std::string& name, Vec& v, ParamGroup group,
                  bool decay) {
  return ParamRef{name, v.data(), v.size(), v.size(), 0, group, decay};
}

ParamRef make_ref(const std::string& name, double& s, ParamGroup group,
                  bool decay) {
  return ParamRef{name, &s, 1, 1, 0, group, decay};
}

/// Shared traversal so that model and gradient views stay index-aligned.
template <typename Enc, typename FcW, typename FcB, typename HypP,
          typename HypT, typename EucW, typename EucB>
std::vector<ParamRef> build_refs(std::size_t layers, HeadMode mode, Enc enc,
                                 FcW fc_w, FcB fc_b, HypP hyp_p, HypT hyp_t,
                                 EucW euc_w, EucB euc_b) {
  std::vector<ParamRef> refs;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string base = "encoder." + std::to_string(l);
    refs.push_back(enc(l, true, base + ".weight"));
    refs.push_back(enc(l, false, base + ".bias"));
  }
  refs.push_back(fc_w());
  refs.push_back(fc_b());
  if (mode == HeadMode::kHyperbolic) {
    for (int k = 0; k < 2; ++k) {
      refs.push_back(hyp_p(k));
      refs.push_back(hyp_t(k));
    }
  } else {
    for (int k = 0; k < 2; ++k) {
      refs.push_back(euc_w(k));
      refs.push_back(euc_b(k));
    }
  }
  return refs;
}

}  // namespace

std::vector<ParamRef> param_refs(Model& model) {
  return build_refs(
      model.encoder.weights.size(), model.head.mode,
      [&](std::size_t l, bool weight, const std::string& name) {
        return weight
                   ? make_ref(name, model.encoder.weights[l],
                              ParamGroup::kEncoder, true)
                   : make_ref(name, model.encoder.biases[l],
                              ParamGroup::kEncoder, false);
      },
      [&] {
        return make_ref("fc.weight", model.head.fc_weight, ParamGroup::kFc,
                        true);
      },
      [&] {
        return make_ref("fc.bias", model.head.fc_bias, ParamGroup::kFc, false);
      },
      [&](int k) {
        return make_ref("head.p" + std::to_string(k), model.head.hyp.p_raw[k],
                        ParamGroup::kHead, false);
      },
      [&](int k) {
        return make_ref("head.t" + std::to_string(k), model.head.hyp.t[k],
                        ParamGroup::kHead, false);
      },
      [&](int k) {
        return make_ref("head.w" + std::to_string(k), model.head.euc.w[k],
                        ParamGroup::kHead, true);
      },
      [&](int k) {
        return make_ref("head.b" + std::to_string(k), model.head.euc.b[k],
                        ParamGroup::kHead, false);
      });
}

std::vector<ParamRef> param_refs(ModelGrads& grads, const Model& model) {
  return build_refs(
      grads.enc_weights.size(), model.head.mode,
      [&](std::size_t l, bool weight, const std::string& name) {
        return weight ? make_ref(name, grads.enc_weights[l],
                                 ParamGroup::kEncoder, true)
                      : make_ref(name, grads.enc_biases[l],
                                 ParamGroup::kEncoder, false);
      },
      [&] {
        return make_ref("fc.weight", grads.fc_weight, ParamGroup::kFc, true);
      },
      [&] { return make_ref("fc.bias", grads.fc_bias, ParamGroup::kFc, false); },
      [&](int k) {
        return make_ref("head.p" + std::to_string(k), grads.hyp_p_raw[k],
                        ParamGroup::kHead, false);
      },
      [&](int k) {
        return make_ref("head.t" + std::to_string(k), grads.hyp_t[k],
                        ParamGroup::kHead, false);
      },
      [&](int k) {
        return make_ref("head.w" + std::to_string(k), grads.euc_w[k],
                        ParamGroup::kHead, true);
      },
      [&](int k) {
        return make_ref("head.b" + std::to_string(k), grads.euc_b[k],
                        ParamGroup::kHead, false);
      });
}

namespace {

struct AdamWState {
  std::vector<Vec> m;
  std::vector<Vec> v;
  long step = 0;
};

struct SgdState {
  std::vector<Vec> velocity;
};

double group_lr(const TrainConfig& config, ParamGroup group, int epoch) {
  double lr = 0.0;
  switch (group) {
    case ParamGroup::kEncoder:
      lr = config.lr_encoder;
      break;
    case ParamGroup::kFc:
      lr = config.lr_fc;
      break;
    case ParamGroup::kHead:
      lr = config.lr_head;
      break;
  }
  const int decays = config.lr_decay_every > 0 ? epoch / config.lr_decay_every : 0;
  for (int i = 0; i < decays; ++i) {
    lr *= config.lr_decay_factor;
  }
  return lr;
}

}  // namespace

TrainResult train(const std::vector<PairSample>& dataset,
                  const TrainConfig& config, HeadMode mode) {
  if (dataset.empty()) {
    throw std::invalid_argument("dataset must be nonempty");
  }
  bool has_change = false;
  bool has_no_change = false;
  for (const PairSample& sample : dataset) {
    (sample.label == 1 ? has_change : has_no_change) = true;
  }
  if (!has_change || !has_no_change) {
    throw std::invalid_argument("dataset must contain both classes");
  }
  if (config.epochs < 1 || config.batch_size < 1) {
    throw std::invalid_argument("epochs and batch size must be >= 1");
  }

  TrainResult result;
  result.model =
      init_model(static_cast<int>(dataset.front().x1.size()), config, mode);
  Model& model = result.model;

  std::vector<ParamRef> refs = param_refs(model);
  AdamWState adam;
  SgdState sgd;
  for (const ParamRef& ref : refs) {
    adam.m.push_back(Vec::Zero(ref.size));
    adam.v.push_back(Vec::Zero(ref.size));
    sgd.velocity.push_back(Vec::Zero(ref.size));
  }

  auto shuffle_rng = make_rng(config.seed, kShuffleStream);
  std::vector<int> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kAdamEps = 1e-8;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + config.batch_size);
      std::vector<PairSample> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(dataset[order[i]]);
      }

      BatchResult batch_result = loss_and_grads(batch, model);
      epoch_loss += batch_result.loss;
      ++batches;

      std::vector<ParamRef> grad_refs = param_refs(batch_result.grads, model);
      if (config.optimizer == OptimizerKind::kAdamW) {
        ++adam.step;
        const double bias1 = 1.0 - std::pow(kBeta1, adam.step);
        const double bias2 = 1.0 - std::pow(kBeta2, adam.step);
        for (std::size_t r = 0; r < refs.size(); ++r) {
          const double lr = group_lr(config, refs[r].group, epoch);
          const double wd = refs[r].decay ? config.weight_decay : 0.0;
          for (Index i = 0; i < refs[r].size; ++i) {
            const double g = grad_refs[r].data[i];
            adam.m[r][i] = kBeta1 * adam.m[r][i] + (1.0 - kBeta1) * g;
            adam.v[r][i] = kBeta2 * adam.v[r][i] + (1.0 - kBeta2) * g * g;
            const double m_hat = adam.m[r][i] / bias1;
            const double v_hat = adam.v[r][i] / bias2;
            refs[r].data[i] -=
                lr * (m_hat / (std::sqrt(v_hat) + kAdamEps) +
                      wd * refs[r].data[i]);
          }
        }
      } else {
        for (std::size_t r = 0; r < refs.size(); ++r) {
          const double lr = group_lr(config, refs[r].group, epoch);
          const double wd = refs[r].decay ? config.weight_decay : 0.0;
          for (Index i = 0; i < refs[r].size; ++i) {
            const double g = grad_refs[r].data[i] + wd * refs[r].data[i];
            sgd.velocity[r][i] = config.momentum * sgd.velocity[r][i] + g;
            refs[r].data[i] -= lr * sgd.velocity[r][i];
          }
        }
      }
    }

    const EvalMetrics metrics = evaluate(dataset, model);
    result.history.push_back(EpochStats{epoch + 1, epoch_loss / batches,
                                        metrics.accuracy, metrics.f1});
  }
  return result;
}

EvalMetrics binary_metrics(const std::vector<int>& predictions,
                           const std::vector<int>& labels) {
  if (predictions.size() != labels.size() || predictions.empty()) {
    throw std::invalid_argument("predictions and labels must align");
  }
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int pred = predictions[i];
    const int label = labels[i];
    if (pred == label) {
      ++correct;
    }
    if (pred == 1 && label == 1) {
      ++tp;
    } else if (pred == 1 && label == 0) {
      ++fp;
    } else if (pred == 0 && label == 1) {
      ++fn;
    }
  }
  EvalMetrics metrics;
  metrics.accuracy =
      static_cast<double>(correct) / static_cast<double>(predictions.size());
  const double precision =
      tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double recall =
      tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  metrics.f1 = precision + recall > 0.0
                   ? 2.0 * precision * recall / (precision + recall)
                   : 0.0;
  return metrics;
}

EvalMetrics evaluate(const std::vector<PairSample>& dataset,
                     const Model& model, double threshold) {
  if (dataset.empty()) {
    throw std::invalid_argument("evaluation dataset must be nonempty");
  }
  std::vector<int> predictions;
  std::vector<int> labels;
  predictions.reserve(dataset.size());
  labels.reserve(dataset.size());
  for (const PairSample& sample : dataset) {
    predictions.push_back(forward(sample, model) >= threshold ? 1 : 0);
    labels.push_back(sample.label);
  }
  return binary_metrics(predictions, labels);
}

}  // namespace hypercd::siamese
