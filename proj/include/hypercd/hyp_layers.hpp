#pragma once

#include <array>
#include <random>

#include "hypercd/ball.hpp"
#include "hypercd/types.hpp"

namespace hypercd::hyplayers {

inline constexpr double kDefaultClipRadius = 2.3;
/// Probability clamp applied before logarithms in the loss.
inline constexpr double kProbEps = 1e-12;

class ClipRadius {
 public:
  explicit ClipRadius(double r);
  double value() const { return r_; }

 private:
  double r_;
};

/// Norm cap min{1, r/||x||} * x. Identity for ||x|| <= r, direction
/// preserving otherwise.
Vec clip_features(const Vec& x, ClipRadius r);

/// Jacobian of clip_features. The measure-zero kink at ||x|| = r takes the
/// interior branch (identity).
Mat clip_jacobian(const Vec& x, ClipRadius r);

/// Exponential map at the origin: tanh(sqrt(c)||x||) * x / (sqrt(c)||x||).
ball::BallPoint lift_to_ball(const Vec& x, ball::Curvature curvature);

Mat lift_jacobian(const Vec& x, ball::Curvature curvature);

/// Per-class decision parameters as consumed by the score: a ball point p_k
/// and a nonzero tangent direction t_k, classes k in {0 = no change,
/// 1 = change}.
struct BlrParams {
  BlrParams(std::array<ball::BallPoint, 2> p_in, std::array<Vec, 2> t_in);

  std::array<ball::BallPoint, 2> p;
  std::array<Vec, 2> t;
};

/// Binary logistic regression score of class k in the ball. Zero when x
/// coincides with p_k.
double hyp_blr_score(const ball::BallPoint& x, const ball::BallPoint& p,
                     const Vec& t);
double hyp_blr_score(const ball::BallPoint& x, const BlrParams& params, int k);

struct BlrScoreGrads {
  Vec dx;
  Vec dp;
  Vec dt;
};
BlrScoreGrads hyp_blr_score_grads(const ball::BallPoint& x,
                                  const ball::BallPoint& p, const Vec& t);

/// Two-class softmax over the per-class scores: exp(s1)/(exp(s0)+exp(s1)),
/// evaluated in a numerically stable form and clamped into (0, 1).
double hyp_blr_prob(const ball::BallPoint& x, const BlrParams& params);

/// Binary cross entropy -[p log(phat) + (1-p) log(1-phat)], with phat
/// clamped to [kProbEps, 1 - kProbEps].
double hyp_bce_loss(double prob, int label);

/// Trainable parametrization of the head: everything lives in Euclidean
/// space, p_raw is lifted through the origin exp map on each forward pass.
struct HypHead {
  std::array<Vec, 2> p_raw;
  std::array<Vec, 2> t;

  static HypHead initialized(Index dim, std::mt19937_64& rng);
  BlrParams lift(ball::Curvature curvature) const;
};

struct HeadForward {
  double loss = 0.0;
  double prob = 0.0;
};

struct HeadGradients {
  double loss = 0.0;
  double prob = 0.0;
  Vec dx;
  std::array<Vec, 2> dp_raw;
  std::array<Vec, 2> dt;
};

HeadForward head_forward(const Vec& x, const HypHead& head, ClipRadius r,
                         ball::Curvature curvature, int label);

/// Reverse-mode gradients of hyp_bce_loss(hyp_blr_prob(lift(clip(x))))
/// w.r.t. the input feature and all head parameters.
HeadGradients head_gradients(const Vec& x, const HypHead& head, ClipRadius r,
                             ball::Curvature curvature, int label);

}  // namespace hypercd::hyplayers
