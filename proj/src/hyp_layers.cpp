#include "hypercd/hyp_layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hypercd::hyplayers {

namespace {

void require_class(int k) {
  if (k != 0 && k != 1) {
    throw std::invalid_argument("class index must be 0 or 1, got " +
                                std::to_string(k));
  }
}

void require_nonzero_direction(const Vec& t) {
  if (t.norm() == 0.0) {
    throw std::domain_error("tangent direction t_k must be nonzero");
  }
}

double stable_sigmoid(double d) {
  if (d >= 0.0) {
    return 1.0 / (1.0 + std::exp(-d));
  }
  const double e = std::exp(d);
  return e / (1.0 + e);
}

double clamp_prob(double p) {
  return std::clamp(p, kProbEps, 1.0 - kProbEps);
}

}  // namespace

ClipRadius::ClipRadius(double r) : r_(r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::domain_error("clip radius must be finite and > 0, got " +
                            std::to_string(r));
  }
}

Vec clip_features(const Vec& x, ClipRadius r) {
  const double norm = x.norm();
  if (norm <= r.value()) {
    return x;
  }
  Vec y = (r.value() / norm) * x;
  // Rounding can leave the rescaled norm a few ulps above r; nudge down so
  // that clipping is exactly idempotent.
  while (y.norm() > r.value()) {
    y *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
  }
  return y;
}

Mat clip_jacobian(const Vec& x, ClipRadius r) {
  const Index n = x.size();
  const double norm = x.norm();
  if (norm <= r.value()) {
    return Mat::Identity(n, n);
  }
  Mat jac = (r.value() / norm) * Mat::Identity(n, n);
  jac.noalias() -= (r.value() / (norm * norm * norm)) * x * x.transpose();
  return jac;
}

ball::BallPoint lift_to_ball(const Vec& x, ball::Curvature curvature) {
  const double sqrt_c = curvature.sqrt();
  const double u = x.norm();
  if (sqrt_c * u < 1e-12) {
    // tanh(z)/z -> 1; the point is numerically x itself.
    return ball::project_to_ball(x, curvature);
  }
  const double scale = std::tanh(sqrt_c * u) / (sqrt_c * u);
  return ball::project_to_ball(scale * x, curvature);
}

Mat lift_jacobian(const Vec& x, ball::Curvature curvature) {
  const Index n = x.size();
  const double s = curvature.sqrt();
  const double u = x.norm();
  if (u == 0.0) {
    return Mat::Identity(n, n);
  }

  // y = a(u) x with a = tanh(s u)/(s u); J = a I + (a'/u) x x^T.
  double a;
  double aprime_over_u;
  const double z = s * u;
  if (z < 1e-4) {
    a = 1.0 - z * z / 3.0;
    aprime_over_u = s * s * (-2.0 / 3.0 + 8.0 * z * z / 15.0);
  } else {
    const double t = std::tanh(z);
    a = t / z;
    aprime_over_u = (1.0 - t * t) / (u * u) - t / (s * u * u * u);
  }
  Mat jac = a * Mat::Identity(n, n);
  jac.noalias() += aprime_over_u * x * x.transpose();
  return jac;
}

BlrParams::BlrParams(std::array<ball::BallPoint, 2> p_in,
                     std::array<Vec, 2> t_in)
    : p(std::move(p_in)), t(std::move(t_in)) {
  for (int k = 0; k < 2; ++k) {
    require_nonzero_direction(t[k]);
    if (t[k].size() != p[k].dim()) {
      throw std::invalid_argument("t_k dimension does not match p_k");
    }
  }
  if (p[0].curvature() != p[1].curvature()) {
    throw std::invalid_argument("class parameters must share curvature");
  }
}

double hyp_blr_score(const ball::BallPoint& x, const ball::BallPoint& p,
                     const Vec& t) {
  if (x.dim() != p.dim() || x.dim() != t.size()) {
    throw std::invalid_argument("score inputs must share dimension");
  }
  if (x.curvature() != p.curvature()) {
    throw std::invalid_argument("score inputs must share curvature");
  }
  require_nonzero_direction(t);

  const double c = x.curvature().value();
  const double sqrt_c = x.curvature().sqrt();
  const double lambda_p = ball::conformal_factor(p);
  const double t_norm = t.norm();

  const Vec m = ball::detail::mobius_add_raw(-p.coords(), x.coords(), c);
  const double b = 1.0 - c * m.squaredNorm();
  if (!(b > 0.0)) {
    throw std::domain_error("score undefined: gyrovector offset left the ball");
  }
  const double arg = 2.0 * sqrt_c * m.dot(t) / (b * t_norm);
  return (lambda_p * t_norm / sqrt_c) * std::asinh(arg);
}

double hyp_blr_score(const ball::BallPoint& x, const BlrParams& params,
                     int k) {
  require_class(k);
  return hyp_blr_score(x, params.p[k], params.t[k]);
}

BlrScoreGrads hyp_blr_score_grads(const ball::BallPoint& x,
                                  const ball::BallPoint& p, const Vec& t) {
  if (x.dim() != p.dim() || x.dim() != t.size()) {
    throw std::invalid_argument("score inputs must share dimension");
  }
  if (x.curvature() != p.curvature()) {
    throw std::invalid_argument("score inputs must share curvature");
  }
  require_nonzero_direction(t);
  ball::detail::require_margin(x);
  ball::detail::require_margin(p);

  const double c = x.curvature().value();
  const double sqrt_c = x.curvature().sqrt();
  const double lambda_p = ball::conformal_factor(p);
  const double t_norm = t.norm();

  const Vec neg_p = -p.coords();
  const Vec m = ball::detail::mobius_add_raw(neg_p, x.coords(), c);
  const double b = 1.0 - c * m.squaredNorm();
  const double mt = m.dot(t);
  const double g = 2.0 * sqrt_c * mt / (b * t_norm);

  const double amp = lambda_p * t_norm / sqrt_c;  // s = amp * asinh(g)
  const double phi = std::asinh(g);
  const double psi = amp / std::sqrt(1.0 + g * g);  // d(score)/dg

  // g = 2 sqrt(c) <m,t> / (b ||t||)
  const Vec dg_dm =
      (2.0 * sqrt_c / (b * t_norm)) * (t + (2.0 * c * mt / b) * m);
  const Vec dg_dt =
      (2.0 * sqrt_c / b) * (m / t_norm - (mt / (t_norm * t_norm * t_norm)) * t);
  const Vec damp_dt = (lambda_p / sqrt_c) * (t / t_norm);
  // lambda_p route: d(amp)/dp = (||t||/sqrt(c)) c lambda^2 p
  const Vec damp_dp =
      (t_norm / sqrt_c) * c * lambda_p * lambda_p * p.coords();

  const Vec grad_m = psi * dg_dm;
  const ball::BallPoint neg_p_pt(neg_p, p.curvature());
  const ball::MobiusAddJacobians jac = ball::mobius_add_jacobians(neg_p_pt, x);

  BlrScoreGrads grads;
  grads.dx = jac.dy.transpose() * grad_m;
  grads.dp = phi * damp_dp - jac.dx.transpose() * grad_m;
  grads.dt = phi * damp_dt + psi * dg_dt;
  return grads;
}

double hyp_blr_prob(const ball::BallPoint& x, const BlrParams& params) {
  const double s0 = hyp_blr_score(x, params, 0);
  const double s1 = hyp_blr_score(x, params, 1);
  return clamp_prob(stable_sigmoid(s1 - s0));
}

double hyp_bce_loss(double prob, int label) {
  if (label != 0 && label != 1) {
    throw std::invalid_argument("label must be 0 or 1, got " +
                                std::to_string(label));
  }
  const double p = clamp_prob(prob);
  return label == 1 ? -std::log(p) : -std::log1p(-p);
}

HypHead HypHead::initialized(Index dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  HypHead head;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int k = 0; k < 2; ++k) {
    head.p_raw[k] = Vec::Zero(dim);
    head.t[k] = Vec(dim);
    for (Index i = 0; i < dim; ++i) {
      head.t[k][i] = gauss(rng) * scale;
    }
  }
  return head;
}

BlrParams HypHead::lift(ball::Curvature curvature) const {
  return BlrParams({lift_to_ball(p_raw[0], curvature),
                    lift_to_ball(p_raw[1], curvature)},
                   {t[0], t[1]});
}

HeadForward head_forward(const Vec& x, const HypHead& head, ClipRadius r,
                         ball::Curvature curvature, int label) {
  const ball::BallPoint y = lift_to_ball(clip_features(x, r), curvature);
  const BlrParams params = head.lift(curvature);
  const double prob = hyp_blr_prob(y, params);
  return HeadForward{hyp_bce_loss(prob, label), prob};
}

HeadGradients head_gradients(const Vec& x, const HypHead& head, ClipRadius r,
                             ball::Curvature curvature, int label) {
  if (label != 0 && label != 1) {
    throw std::invalid_argument("label must be 0 or 1");
  }

  const Vec z = clip_features(x, r);
  const ball::BallPoint y = lift_to_ball(z, curvature);
  const BlrParams params = head.lift(curvature);

  const BlrScoreGrads g0 = hyp_blr_score_grads(y, params.p[0], params.t[0]);
  const BlrScoreGrads g1 = hyp_blr_score_grads(y, params.p[1], params.t[1]);
  const double s0 = hyp_blr_score(y, params, 0);
  const double s1 = hyp_blr_score(y, params, 1);

  const double prob = clamp_prob(stable_sigmoid(s1 - s0));
  const double dloss_ddelta = prob - static_cast<double>(label);

  HeadGradients grads;
  grads.loss = hyp_bce_loss(prob, label);
  grads.prob = prob;

  const Vec grad_y = dloss_ddelta * (g1.dx - g0.dx);
  grads.dx = clip_jacobian(x, r).transpose() *
             (lift_jacobian(z, curvature).transpose() * grad_y);
  for (int k = 0; k < 2; ++k) {
    const double sign = (k == 1) ? 1.0 : -1.0;
    const BlrScoreGrads& gk = (k == 1) ? g1 : g0;
    grads.dt[k] = (sign * dloss_ddelta) * gk.dt;
    grads.dp_raw[k] = lift_jacobian(head.p_raw[k], curvature).transpose() *
                      ((sign * dloss_ddelta) * gk.dp);
  }
  return grads;
}

}  // namespace hypercd::hyplayers
