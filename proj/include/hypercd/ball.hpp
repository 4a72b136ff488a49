#pragma once

#include "hypercd/types.hpp"

namespace hypercd::ball {

/// Safety margin kept between any stored point and the ball boundary:
/// after projection, c*||x||^2 <= 1 - kDefaultBallEps.
inline constexpr double kDefaultBallEps = 1e-5;

/// Nonnegative curvature parameter of the Poincare ball. c = 0 is the
/// Euclidean limit and is rejected by the hyperbolic operations; use the
/// *_limit functions instead.
class Curvature {
 public:
  explicit Curvature(double c);

  double value() const { return c_; }
  double sqrt() const;
  bool is_euclidean() const { return c_ == 0.0; }
  /// Ball radius c^(-1/2); requires c > 0.
  double radius() const;

  friend bool operator==(Curvature a, Curvature b) { return a.c_ == b.c_; }
  friend bool operator!=(Curvature a, Curvature b) { return a.c_ != b.c_; }

 private:
  double c_;
};

/// A point strictly inside the ball: c*||coords||^2 < 1.
class BallPoint {
 public:
  /// Throws std::domain_error if the coordinates are on or outside the ball.
  BallPoint(Vec coords, Curvature curvature);

  static BallPoint origin(Index dim, Curvature curvature);

  const Vec& coords() const { return coords_; }
  Curvature curvature() const { return curvature_; }
  Index dim() const { return coords_.size(); }

 private:
  Vec coords_;
  Curvature curvature_;
};

/// A direction attached to the tangent space at `base`.
struct TangentVec {
  TangentVec(Vec coords_in, BallPoint base_in);

  Vec coords;
  BallPoint base;
};

/// Conformal factor lambda_x = 2 / (1 - c*||x||^2). Always >= 2; exactly 2
/// at the origin.
double conformal_factor(const BallPoint& x);

/// d lambda / dx = c * lambda^2 * x.
Vec conformal_factor_grad(const BallPoint& x);

/// Gyrovector addition of two ball points; result is re-projected inside the
/// ball. Non-commutative.
BallPoint mobius_add(const BallPoint& x, const BallPoint& y);

struct MobiusAddJacobians {
  Mat dx;  // d(x (+) y) / dx
  Mat dy;  // d(x (+) y) / dy
};
MobiusAddJacobians mobius_add_jacobians(const BallPoint& x, const BallPoint& y);

/// Geodesic distance (2/sqrt(c)) * artanh(sqrt(c) * ||(-x) (+) y||).
double distance(const BallPoint& x, const BallPoint& y);

struct DistanceGrads {
  Vec dx;
  Vec dy;
};
/// Subgradient 0 is returned for coincident points.
DistanceGrads distance_grads(const BallPoint& x, const BallPoint& y);

/// The c -> 0 limit of the ball distance: 2 * ||x - y||.
double euclidean_limit_distance(const Vec& x, const Vec& y);

/// Geodesic shoot from x along tangent direction v.
BallPoint exp_map(const BallPoint& x, const Vec& v);
BallPoint exp_map(const TangentVec& v);

struct ExpMapJacobians {
  Mat dx;  // w.r.t. the base point
  Mat dv;  // w.r.t. the tangent coordinates
};
ExpMapJacobians exp_map_jacobians(const BallPoint& x, const Vec& v);

/// Rescales x onto norm sqrt((1 - eps)/c) if it is outside the safety
/// margin; interior points pass through unchanged. Direction is preserved.
BallPoint project_to_ball(const Vec& x, Curvature curvature,
                          double eps = kDefaultBallEps);

namespace detail {
/// Raw gyrovector sum on coordinates, no projection. Valid while both
/// arguments are inside the ball (the denominator is then positive).
Vec mobius_add_raw(const Vec& x, const Vec& y, double c);

/// Throws std::domain_error unless c*||x||^2 <= 1 - eps. Gradient formulas
/// assume this margin.
void require_margin(const BallPoint& x, double eps = kDefaultBallEps);
}  // namespace detail

}  // namespace hypercd::ball
