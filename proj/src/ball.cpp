#include "hypercd/ball.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hypercd::ball {

namespace {

void require_same_dim(Index a, Index b) {
  if (a != b) {
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a) +
                                " vs " + std::to_string(b));
  }
}

void require_same_curvature(Curvature a, Curvature b) {
  if (a != b) {
    throw std::invalid_argument("curvature mismatch: " +
                                std::to_string(a.value()) + " vs " +
                                std::to_string(b.value()));
  }
}

void require_hyperbolic(Curvature c) {
  if (c.value() <= 0.0) {
    throw std::domain_error(
        "operation requires c > 0; use the euclidean_limit functions at c = 0");
  }
}

}  // namespace

Curvature::Curvature(double c) : c_(c) {
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::domain_error("curvature must be finite and >= 0, got " +
                            std::to_string(c));
  }
}

double Curvature::sqrt() const { return std::sqrt(c_); }

double Curvature::radius() const {
  require_hyperbolic(*this);
  return 1.0 / std::sqrt(c_);
}

BallPoint::BallPoint(Vec coords, Curvature curvature)
    : coords_(std::move(coords)), curvature_(curvature) {
  const double cn2 = curvature_.value() * coords_.squaredNorm();
  if (!(cn2 < 1.0)) {
    throw std::domain_error("point outside the ball: c*||x||^2 = " +
                            std::to_string(cn2));
  }
}

BallPoint BallPoint::origin(Index dim, Curvature curvature) {
  return BallPoint(Vec::Zero(dim), curvature);
}

TangentVec::TangentVec(Vec coords_in, BallPoint base_in)
    : coords(std::move(coords_in)), base(std::move(base_in)) {
  require_same_dim(coords.size(), base.dim());
}

double conformal_factor(const BallPoint& x) {
  const double denom = 1.0 - x.curvature().value() * x.coords().squaredNorm();
  if (!(denom > 0.0)) {
    throw std::domain_error("conformal factor undefined: c*||x||^2 >= 1");
  }
  return 2.0 / denom;
}

Vec conformal_factor_grad(const BallPoint& x) {
  detail::require_margin(x);
  const double lambda = conformal_factor(x);
  return (x.curvature().value() * lambda * lambda) * x.coords();
}

namespace detail {

Vec mobius_add_raw(const Vec& x, const Vec& y, double c) {
  const double xy = x.dot(y);
  const double x2 = x.squaredNorm();
  const double y2 = y.squaredNorm();
  const double num_x = 1.0 + 2.0 * c * xy + c * y2;
  const double num_y = 1.0 - c * x2;
  const double denom = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
  return (num_x * x + num_y * y) / denom;
}

void require_margin(const BallPoint& x, double eps) {
  const double cn2 = x.curvature().value() * x.coords().squaredNorm();
  if (cn2 > 1.0 - eps) {
    throw std::domain_error(
        "point too close to the ball boundary for gradient evaluation; "
        "project or clip first");
  }
}

}  // namespace detail

BallPoint mobius_add(const BallPoint& x, const BallPoint& y) {
  require_same_dim(x.dim(), y.dim());
  require_same_curvature(x.curvature(), y.curvature());
  const Vec sum =
      detail::mobius_add_raw(x.coords(), y.coords(), x.curvature().value());
  return project_to_ball(sum, x.curvature());
}

MobiusAddJacobians mobius_add_jacobians(const BallPoint& x,
                                        const BallPoint& y) {
  require_same_dim(x.dim(), y.dim());
  require_same_curvature(x.curvature(), y.curvature());
  detail::require_margin(x);
  detail::require_margin(y);

  const double c = x.curvature().value();
  const Vec& xv = x.coords();
  const Vec& yv = y.coords();
  const Index n = xv.size();

  const double xy = xv.dot(yv);
  const double x2 = xv.squaredNorm();
  const double y2 = yv.squaredNorm();
  const double alpha = 1.0 + 2.0 * c * xy + c * y2;
  const double beta = 1.0 - c * x2;
  const double denom = 1.0 + 2.0 * c * xy + c * c * x2 * y2;
  const Vec out = (alpha * xv + beta * yv) / denom;

  // num = alpha*x + beta*y, den as above; d(num/den) = (dnum - out*dden^T)/den
  const Vec dden_dx = 2.0 * c * yv + 2.0 * c * c * y2 * xv;
  const Vec dden_dy = 2.0 * c * xv + 2.0 * c * c * x2 * yv;

  Mat dnum_dx = alpha * Mat::Identity(n, n);
  dnum_dx.noalias() += 2.0 * c * xv * yv.transpose();
  dnum_dx.noalias() -= 2.0 * c * yv * xv.transpose();

  Mat dnum_dy = beta * Mat::Identity(n, n);
  dnum_dy.noalias() += xv * (2.0 * c * (xv + yv)).transpose();

  MobiusAddJacobians jac;
  jac.dx = (dnum_dx - out * dden_dx.transpose()) / denom;
  jac.dy = (dnum_dy - out * dden_dy.transpose()) / denom;
  return jac;
}

double distance(const BallPoint& x, const BallPoint& y) {
  require_same_dim(x.dim(), y.dim());
  require_same_curvature(x.curvature(), y.curvature());
  require_hyperbolic(x.curvature());

  const double sqrt_c = x.curvature().sqrt();
  const Vec m = detail::mobius_add_raw(-x.coords(), y.coords(),
                                       x.curvature().value());
  const double arg = sqrt_c * m.norm();
  if (arg >= 1.0) {
    throw std::domain_error(
        "distance argument reached the ball boundary; upstream invariant "
        "violated");
  }
  return (2.0 / sqrt_c) * std::atanh(arg);
}

DistanceGrads distance_grads(const BallPoint& x, const BallPoint& y) {
  require_same_dim(x.dim(), y.dim());
  require_same_curvature(x.curvature(), y.curvature());
  require_hyperbolic(x.curvature());
  detail::require_margin(x);
  detail::require_margin(y);

  const double c = x.curvature().value();
  const Vec neg_x = -x.coords();
  const Vec m = detail::mobius_add_raw(neg_x, y.coords(), c);
  const double u = m.norm();

  DistanceGrads grads;
  if (u <= 1e-14) {
    // Coincident points: the metric has a kink here, return the subgradient 0.
    grads.dx = Vec::Zero(x.dim());
    grads.dy = Vec::Zero(x.dim());
    return grads;
  }

  const Vec grad_m = (2.0 / (1.0 - c * u * u)) * (m / u);
  const BallPoint neg_x_pt(neg_x, x.curvature());
  const MobiusAddJacobians jac = mobius_add_jacobians(neg_x_pt, y);
  grads.dx = -(jac.dx.transpose() * grad_m);
  grads.dy = jac.dy.transpose() * grad_m;
  return grads;
}

double euclidean_limit_distance(const Vec& x, const Vec& y) {
  require_same_dim(x.size(), y.size());
  return 2.0 * (x - y).norm();
}

BallPoint exp_map(const BallPoint& x, const Vec& v) {
  require_same_dim(x.dim(), v.size());
  require_hyperbolic(x.curvature());

  const double u = v.norm();
  if (u == 0.0) {
    return x;
  }
  const double c = x.curvature().value();
  const double sqrt_c = x.curvature().sqrt();
  const double lambda = conformal_factor(x);
  const double t = std::tanh(sqrt_c * lambda * u / 2.0);
  const Vec scaled = (t / (sqrt_c * u)) * v;
  const Vec sum = detail::mobius_add_raw(x.coords(), scaled, c);
  return project_to_ball(sum, x.curvature());
}

BallPoint exp_map(const TangentVec& v) { return exp_map(v.base, v.coords); }

ExpMapJacobians exp_map_jacobians(const BallPoint& x, const Vec& v) {
  require_same_dim(x.dim(), v.size());
  require_hyperbolic(x.curvature());
  detail::require_margin(x);

  const double c = x.curvature().value();
  const double sqrt_c = x.curvature().sqrt();
  const double lambda = conformal_factor(x);
  const Index n = x.dim();
  const double u = v.norm();

  ExpMapJacobians jac;
  if (u <= 1e-14) {
    // exp_x(v) -> x (+) (lambda/2) v for small v; at v = 0 the composite
    // derivative collapses to the identity.
    jac.dx = Mat::Identity(n, n);
    jac.dv = Mat::Identity(n, n);
    return jac;
  }

  const double g = sqrt_c * lambda * u / 2.0;  // tanh argument
  const double t = std::tanh(g);

  // w = t * v / (sqrt_c * u)
  const Vec w = (t / (sqrt_c * u)) * v;

  // dw/dv = (t/(sc*u)) I + kappa * v v^T with the small-angle series used
  // when g is tiny (the closed form cancels catastrophically there).
  double radial;  // t / (sqrt_c * u)
  double kappa;
  if (g < 1e-4) {
    radial = (lambda / 2.0) * (1.0 - g * g / 3.0);
    kappa = -(c * lambda * lambda * lambda) / 12.0;
  } else {
    radial = t / (sqrt_c * u);
    kappa = (1.0 - t * t) * lambda / (2.0 * u * u) - t / (sqrt_c * u * u * u);
  }
  Mat dw_dv = radial * Mat::Identity(n, n);
  dw_dv.noalias() += kappa * v * v.transpose();

  // w depends on x only through lambda_x.
  const Mat dw_dx = ((1.0 - t * t) * c * lambda * lambda / 2.0) * v *
                    x.coords().transpose();

  const BallPoint w_pt = project_to_ball(w, x.curvature());
  const MobiusAddJacobians add_jac = mobius_add_jacobians(x, w_pt);
  jac.dv = add_jac.dy * dw_dv;
  jac.dx = add_jac.dx + add_jac.dy * dw_dx;
  return jac;
}

BallPoint project_to_ball(const Vec& x, Curvature curvature, double eps) {
  require_hyperbolic(curvature);
  const double c = curvature.value();
  const double cn2 = c * x.squaredNorm();
  if (cn2 <= 1.0 - eps) {
    return BallPoint(x, curvature);
  }
  const double target_norm = std::sqrt((1.0 - eps) / c);
  return BallPoint(x * (target_norm / x.norm()), curvature);
}

}  // namespace hypercd::ball
