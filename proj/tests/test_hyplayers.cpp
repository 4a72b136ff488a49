#include <doctest.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "hypercd/hyp_layers.hpp"
#include "support/test_util.hpp"

using namespace hypercd;
using ball::BallPoint;
using ball::Curvature;
using hyplayers::ClipRadius;
using testutil::kGradTol;
using testutil::max_rel_err;

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

hyplayers::HypHead random_head(std::mt19937_64& rng, Index dim,
                               double p_scale = 0.3, double t_scale = 0.7) {
  hyplayers::HypHead head;
  for (int k = 0; k < 2; ++k) {
    head.p_raw[k] = testutil::random_vec(rng, dim, p_scale);
    head.t[k] = testutil::random_vec(rng, dim, t_scale);
    if (head.t[k].norm() < 1e-6) {
      head.t[k][0] += 1.0;
    }
  }
  return head;
}

}  // namespace

TEST_CASE("clip radius validation") {
  CHECK_THROWS_AS(ClipRadius(0.0), std::domain_error);
  CHECK_THROWS_AS(ClipRadius(-1.0), std::domain_error);
  CHECK(ClipRadius(2.3).value() == 2.3);
}

TEST_CASE("clip examples") {
  const ClipRadius r(2.3);
  Vec x = vec2(0.6, 0.8);  // norm 1
  CHECK(hyplayers::clip_features(x, r) == x);

  const Vec on_axis = hyplayers::clip_features(vec2(5.0, 0.0), r);
  CHECK(on_axis[0] == doctest::Approx(2.3).epsilon(1e-15));
  CHECK(on_axis[1] == 0.0);

  const Vec clipped = hyplayers::clip_features(vec2(3.0, 4.0), r);
  CHECK(clipped[0] == doctest::Approx(1.38).epsilon(1e-15));
  CHECK(clipped[1] == doctest::Approx(1.84).epsilon(1e-15));

  CHECK(hyplayers::clip_features(Vec::Zero(3), r) == Vec::Zero(3));
}

TEST_CASE("clip is idempotent and norm bounded") {
  auto rng = make_rng(201);
  const ClipRadius r(2.3);
  std::uniform_real_distribution<double> norm_dist(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec x = testutil::random_unit(rng, 4) * norm_dist(rng);
    const Vec once = hyplayers::clip_features(x, r);
    CHECK(once.norm() <= r.value() * (1.0 + 1e-15));
    CHECK(hyplayers::clip_features(once, r) == once);
  }
}

TEST_CASE("lift examples") {
  CHECK(hyplayers::lift_to_ball(Vec::Zero(3), Curvature(1.0)).coords() ==
        Vec::Zero(3));

  const BallPoint a = hyplayers::lift_to_ball(vec2(0.25, 0.0), Curvature(1.0));
  CHECK(a.coords()[0] == doctest::Approx(0.24491866240370913).epsilon(1e-15));
  CHECK(a.coords()[1] == 0.0);

  const BallPoint b = hyplayers::lift_to_ball(vec2(2.0, 0.0), Curvature(0.3));
  CHECK(b.coords()[0] == doctest::Approx(1.4585065269002148).epsilon(1e-15));
}

TEST_CASE("lift matches origin exp map") {
  auto rng = make_rng(202);
  for (double c : {0.3, 1.0}) {
    for (int i = 0; i < 100; ++i) {
      const Vec x = testutil::random_vec(rng, 4, 1.0);
      const Vec lifted = hyplayers::lift_to_ball(x, Curvature(c)).coords();
      const Vec shot =
          ball::exp_map(BallPoint::origin(4, Curvature(c)), x).coords();
      REQUIRE((lifted - shot).norm() <= 1e-12);
    }
  }
}

TEST_CASE("lift stays inside the ball for huge inputs") {
  auto rng = make_rng(203);
  std::uniform_real_distribution<double> log_norm(-6.0, 6.0);
  for (double c : {0.1, 1.0}) {
    for (int i = 0; i < 10000; ++i) {
      const Vec x =
          testutil::random_unit(rng, 3) * std::pow(10.0, log_norm(rng));
      const BallPoint y = hyplayers::lift_to_ball(x, Curvature(c));
      REQUIRE(c * y.coords().squaredNorm() < 1.0);
    }
  }
}

TEST_CASE("clip and lift jacobians vs finite differences") {
  auto rng = make_rng(204);
  const ClipRadius r(2.3);
  for (int i = 0; i < 100; ++i) {
    // Mix interior and clipped regimes, avoiding the kink at norm 2.3.
    const double norm = (i % 2 == 0) ? 1.5 : 4.0;
    const Vec x = testutil::random_unit(rng, 4) * norm;
    const Mat analytic_clip = hyplayers::clip_jacobian(x, r);
    const Mat fd_clip = testutil::fd_jacobian(
        [&](const Vec& q) { return hyplayers::clip_features(q, r); }, x);
    REQUIRE(max_rel_err(analytic_clip, fd_clip) <= kGradTol);

    for (double c : {0.3, 1.0}) {
      const Vec z = hyplayers::clip_features(x, r);
      const Mat analytic_lift = hyplayers::lift_jacobian(z, Curvature(c));
      const Mat fd_lift = testutil::fd_jacobian(
          [&](const Vec& q) {
            return hyplayers::lift_to_ball(q, Curvature(c)).coords();
          },
          z);
      REQUIRE(max_rel_err(analytic_lift, fd_lift) <= kGradTol);
    }
  }
}

TEST_CASE("lift jacobian across the series threshold") {
  auto rng = make_rng(205);
  for (double scale : {1e-7, 5e-5, 2e-4, 1e-2}) {
    const Vec x = testutil::random_unit(rng, 3) * scale;
    const Mat analytic = hyplayers::lift_jacobian(x, Curvature(1.0));
    const Mat fd = testutil::fd_jacobian(
        [&](const Vec& q) {
          return hyplayers::lift_to_ball(q, Curvature(1.0)).coords();
        },
        x, 1e-7);
    CHECK(max_rel_err(analytic, fd) <= 1e-3);
  }
}

TEST_CASE("blr score examples") {
  const Curvature c1(1.0);
  const BallPoint origin = BallPoint::origin(2, c1);
  const Vec t1 = vec2(1.0, 0.0);

  // x = p -> 0 by Mobius cancellation.
  const BallPoint p(vec2(0.3, -0.2), c1);
  CHECK(std::abs(hyplayers::hyp_blr_score(p, p, vec2(0.4, 0.7))) <= 1e-12);

  const BallPoint x(vec2(0.3, 0.0), c1);
  CHECK(hyplayers::hyp_blr_score(x, origin, t1) ==
        doctest::Approx(1.2380784168124469).epsilon(1e-15));
}

TEST_CASE("blr score euclidean limit") {
  auto rng = make_rng(206);
  const Curvature tiny(1e-8);
  for (int i = 0; i < 1000; ++i) {
    const Vec xv = testutil::random_unit(rng, 3) * 0.5;
    const Vec pv = testutil::random_unit(rng, 3) * 0.5;
    const Vec t = testutil::random_vec(rng, 3, 0.5);
    if (t.norm() < 1e-3) {
      continue;
    }
    const double score = hyplayers::hyp_blr_score(BallPoint(xv, tiny),
                                                  BallPoint(pv, tiny), t);
    const double limit = 4.0 * (xv - pv).dot(t);
    REQUIRE(std::abs(score - limit) / std::max(1.0, std::abs(limit)) <= 1e-3);
  }
}

TEST_CASE("blr score is monotone on the t ray") {
  const Curvature c(0.5);
  const Vec t = vec2(0.6, -0.3);
  const BallPoint origin = BallPoint::origin(2, c);
  const double radius = c.radius();
  double prev = -1.0;  // score at s -> 0+ approaches 0 from above
  for (int i = 1; i <= 50; ++i) {
    const double s = 0.98 * radius * i / 50.0;
    const BallPoint x(s * t / t.norm(), c);
    const double score = hyplayers::hyp_blr_score(x, origin, t);
    REQUIRE(score > prev);
    prev = score;
  }
}

TEST_CASE("blr score rejects degenerate inputs") {
  const Curvature c1(1.0);
  const BallPoint x(vec2(0.1, 0.1), c1);
  CHECK_THROWS_AS(hyplayers::hyp_blr_score(x, x, Vec::Zero(2)),
                  std::domain_error);
  CHECK_THROWS_AS(
      hyplayers::hyp_blr_score(x, BallPoint::origin(3, c1), Vec::Ones(3)),
      std::invalid_argument);
  CHECK_THROWS_AS(
      hyplayers::hyp_blr_score(x, BallPoint::origin(2, Curvature(0.5)),
                               Vec::Ones(2)),
      std::invalid_argument);
}

TEST_CASE("blr probability") {
  const Curvature c1(1.0);
  const BallPoint origin = BallPoint::origin(2, c1);

  // Symmetric scores: s0 = s1 -> 0.5.
  const hyplayers::BlrParams sym({origin, origin},
                                 {vec2(0.7, 0.1), vec2(0.7, 0.1)});
  CHECK(hyplayers::hyp_blr_prob(BallPoint(vec2(0.2, 0.3), c1), sym) == 0.5);

  // Mirrored params: prob = logistic of the score difference.
  const hyplayers::BlrParams mirrored({origin, origin},
                                      {vec2(-1.0, 0.0), vec2(1.0, 0.0)});
  const BallPoint x(vec2(0.3, 0.0), c1);
  const double s1 = hyplayers::hyp_blr_score(x, mirrored, 1);
  const double s0 = hyplayers::hyp_blr_score(x, mirrored, 0);
  CHECK(s0 == doctest::Approx(-s1).epsilon(1e-14));
  const double expected = 1.0 / (1.0 + std::exp(-(s1 - s0)));
  CHECK(hyplayers::hyp_blr_prob(x, mirrored) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("logistic of ln 3 is 0.75") {
  // Probability normalization sanity: exp(s1)/(exp(s0)+exp(s1)) with
  // s1 - s0 = ln 3 must give 3/4.
  const double diff = std::log(3.0);
  CHECK(1.0 / (1.0 + std::exp(-diff)) == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("bce loss") {
  CHECK(hyplayers::hyp_bce_loss(0.5, 1) ==
        doctest::Approx(0.69314718055994531).epsilon(1e-15));
  CHECK(hyplayers::hyp_bce_loss(0.5, 0) ==
        doctest::Approx(0.69314718055994531).epsilon(1e-15));
  CHECK(hyplayers::hyp_bce_loss(0.9, 1) ==
        doctest::Approx(0.10536051565782630).epsilon(1e-14));
  CHECK(hyplayers::hyp_bce_loss(1.0 - 1e-12, 1) <= 1e-11);
  CHECK(hyplayers::hyp_bce_loss(1.0, 1) <= 1.1e-12);  // clamped
  CHECK(hyplayers::hyp_bce_loss(0.0, 1) ==
        doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
  CHECK_THROWS_AS(hyplayers::hyp_bce_loss(0.5, 2), std::invalid_argument);
}

TEST_CASE("blr score gradients vs finite differences") {
  auto rng = make_rng(207);
  for (double c : {0.1, 0.3, 0.5, 0.7, 1.0}) {
    const Curvature curv(c);
    for (int i = 0; i < 40; ++i) {
      const Vec xv = testutil::random_ball_vec(rng, 3, c, 0.7);
      const Vec pv = testutil::random_ball_vec(rng, 3, c, 0.7);
      Vec t = testutil::random_vec(rng, 3, 0.8);
      if (t.norm() < 1e-3) {
        t[0] += 1.0;
      }
      const auto grads = hyplayers::hyp_blr_score_grads(BallPoint(xv, curv),
                                                        BallPoint(pv, curv), t);
      const Vec fd_dx = testutil::fd_gradient(
          [&](const Vec& q) {
            return hyplayers::hyp_blr_score(BallPoint(q, curv),
                                            BallPoint(pv, curv), t);
          },
          xv);
      const Vec fd_dp = testutil::fd_gradient(
          [&](const Vec& q) {
            return hyplayers::hyp_blr_score(BallPoint(xv, curv),
                                            BallPoint(q, curv), t);
          },
          pv);
      const Vec fd_dt = testutil::fd_gradient(
          [&](const Vec& q) {
            return hyplayers::hyp_blr_score(BallPoint(xv, curv),
                                            BallPoint(pv, curv), q);
          },
          t);
      REQUIRE(max_rel_err(grads.dx, fd_dx) <= kGradTol);
      REQUIRE(max_rel_err(grads.dp, fd_dp) <= kGradTol);
      REQUIRE(max_rel_err(grads.dt, fd_dt) <= kGradTol);
    }
  }
}

TEST_CASE("head gradient at the symmetric origin") {
  // x = 0, p0 = p1 = 0, t0 = -t1: probability is exactly 0.5 and the input
  // gradient reduces to (prob - label) * 8 t1, i.e. -4 t1 for label 1.
  hyplayers::HypHead head;
  const Vec t1 = vec2(0.5, -0.2);
  head.p_raw = {Vec::Zero(2), Vec::Zero(2)};
  head.t = {-t1, t1};

  const auto grads = hyplayers::head_gradients(Vec::Zero(2), head,
                                               ClipRadius(2.3), Curvature(1.0),
                                               1);
  CHECK(grads.prob == 0.5);
  CHECK((grads.dx - (-4.0 * t1)).norm() <= 1e-12);

  const auto grads0 = hyplayers::head_gradients(Vec::Zero(2), head,
                                                ClipRadius(2.3),
                                                Curvature(1.0), 0);
  CHECK((grads0.dx - 4.0 * t1).norm() <= 1e-12);
}

TEST_CASE("full head gradients vs finite differences") {
  auto rng = make_rng(208);
  const ClipRadius r(2.3);
  for (double c : {0.1, 0.3, 0.5, 0.7, 1.0}) {
    const Curvature curv(c);
    int accepted = 0;
    int attempts = 0;
    while (accepted < 20 && attempts < 400) {
      ++attempts;
      const int i = attempts;
      const Index dim = 4;
      // Half the draws land in the clipped regime (norm > 2.3).
      const double norm = (i % 2 == 0) ? 1.3 : 3.5;
      const Vec x = testutil::random_unit(rng, dim) * norm;
      hyplayers::HypHead head = random_head(rng, dim, 0.25, 0.6);
      const int label = i % 2;

      // A probability this close to 0 or 1 starves the central-difference
      // oracle of precision (the loss runs through the stored p-hat, whose
      // absolute rounding is amplified by 1/(1 - p-hat)); the analytic
      // gradient is exact there but unverifiable by FD, so redraw.
      const double prob =
          hyplayers::head_forward(x, head, r, curv, label).prob;
      if (prob < 1e-4 || prob > 1.0 - 1e-4) {
        continue;
      }
      ++accepted;

      const auto grads = hyplayers::head_gradients(x, head, r, curv, label);

      const Vec fd_dx = testutil::fd_gradient(
          [&](const Vec& q) {
            return hyplayers::head_forward(q, head, r, curv, label).loss;
          },
          x);
      REQUIRE(max_rel_err(grads.dx, fd_dx) <= kGradTol);

      for (int k = 0; k < 2; ++k) {
        hyplayers::HypHead probe = head;
        const Vec fd_dp = testutil::fd_gradient(
            [&](const Vec& q) {
              probe.p_raw[k] = q;
              return hyplayers::head_forward(x, probe, r, curv, label).loss;
            },
            head.p_raw[k]);
        const Vec fd_dt = testutil::fd_gradient(
            [&](const Vec& q) {
              probe.p_raw[k] = head.p_raw[k];
              probe.t[k] = q;
              return hyplayers::head_forward(x, probe, r, curv, label).loss;
            },
            head.t[k]);
        REQUIRE(max_rel_err(grads.dp_raw[k], fd_dp) <= kGradTol);
        REQUIRE(max_rel_err(grads.dt[k], fd_dt) <= kGradTol);
      }
    }
    REQUIRE(accepted == 20);
  }
}

TEST_CASE("head gradient euclidean limit") {
  // At c = 1e-8 the head converges to logistic regression with logit
  // 4<x - p1, t1> - 4<x - p0, t0>.
  auto rng = make_rng(209);
  const Curvature tiny(1e-8);
  const ClipRadius r(2.3);
  for (int i = 0; i < 50; ++i) {
    const Vec x = testutil::random_unit(rng, 3) * 0.5;
    hyplayers::HypHead head = random_head(rng, 3, 0.2, 0.5);
    const int label = i % 2;

    const auto grads = hyplayers::head_gradients(x, head, r, tiny, label);

    const double logit = 4.0 * (x - head.p_raw[0]).dot(head.t[0]);
    const double logit1 = 4.0 * (x - head.p_raw[1]).dot(head.t[1]);
    const double prob = 1.0 / (1.0 + std::exp(-(logit1 - logit)));
    const Vec expected_dx =
        (prob - label) * 4.0 * (head.t[1] - head.t[0]);
    REQUIRE(max_rel_err(grads.dx, expected_dx, 1e-2) <= 1e-3);
  }
}

TEST_CASE("head initialization shape") {
  auto rng = make_rng(210);
  const auto head = hyplayers::HypHead::initialized(8, rng);
  for (int k = 0; k < 2; ++k) {
    CHECK(head.p_raw[k] == Vec::Zero(8));
    CHECK(head.t[k].size() == 8);
    CHECK(head.t[k].norm() > 0.0);
  }
  CHECK(head.t[0] != head.t[1]);
}
