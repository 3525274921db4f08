#include "rearrange/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

namespace rearrange {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(IntegrateUnicycle, StraightLine) {
  const Pose2 p = integrate_unicycle({0, 0, 0}, 1.0, 0.0, 1.0);
  EXPECT_DOUBLE_EQ(p.x, 1.0);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
  EXPECT_DOUBLE_EQ(p.theta, 0.0);
}

TEST(IntegrateUnicycle, PureRotation) {
  const Pose2 p = integrate_unicycle({0, 0, 0}, 0.0, kPi / 2, 1.0);
  EXPECT_DOUBLE_EQ(p.x, 0.0);
  EXPECT_DOUBLE_EQ(p.y, 0.0);
  EXPECT_NEAR(p.theta, kPi / 2, 1e-15);
}

TEST(IntegrateUnicycle, QuarterArc) {
  // x = (v/w) sin(wt), y = (v/w)(1 - cos(wt)) with v = w = 1, t = pi/2.
  const Pose2 p = integrate_unicycle({0, 0, 0}, 1.0, 1.0, kPi / 2);
  EXPECT_NEAR(p.x, 1.0, 1e-12);
  EXPECT_NEAR(p.y, 1.0, 1e-12);
  EXPECT_NEAR(p.theta, kPi / 2, 1e-12);
}

TEST(IntegrateUnicycle, MatchesClosedFormArc) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 2000; ++i) {
    const Pose2 start{u(rng), u(rng), wrap_angle(u(rng) * 2)};
    const double v = u(rng);
    double w = u(rng);
    if (std::abs(w) < 1e-3) w = 1e-3;
    const double dt = std::abs(u(rng)) + 0.01;
    const Pose2 p = integrate_unicycle(start, v, w, dt);
    const double r = v / w;
    const double th1 = start.theta + w * dt;
    EXPECT_NEAR(p.x, start.x + r * (std::sin(th1) - std::sin(start.theta)), 1e-9);
    EXPECT_NEAR(p.y, start.y - r * (std::cos(th1) - std::cos(start.theta)), 1e-9);
    EXPECT_NEAR(wrap_angle(p.theta - th1), 0.0, 1e-9);
  }
}

TEST(IntegrateUnicycle, TinyYawRateIsContinuous) {
  const Pose2 a = integrate_unicycle({0, 0, 0.3}, 1.0, 0.0, 2.0);
  const Pose2 b = integrate_unicycle({0, 0, 0.3}, 1.0, 2e-9, 2.0);
  EXPECT_NEAR(a.x, b.x, 1e-8);
  EXPECT_NEAR(a.y, b.y, 1e-8);
}

TEST(IntegrateUnicycle, ReversingTheTwistReturnsHome) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 2000; ++i) {
    const Pose2 start{u(rng), u(rng), wrap_angle(u(rng))};
    const double v = u(rng), w = u(rng), dt = std::abs(u(rng));
    const Pose2 back =
        integrate_unicycle(integrate_unicycle(start, v, w, dt), -v, -w, dt);
    EXPECT_NEAR(back.x, start.x, 1e-9);
    EXPECT_NEAR(back.y, start.y, 1e-9);
    EXPECT_NEAR(wrap_angle(back.theta - start.theta), 0.0, 1e-9);
  }
}

TEST(WrapAngle, StaysInHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(wrap_angle(2 * kPi + 0.1), 0.1, 1e-12);
}

TEST(Compose, InverseIsIdentity) {
  const Pose2 a{1.0, -2.0, 0.7};
  const Pose2 id = compose(a, inverse(a));
  EXPECT_NEAR(id.x, 0.0, 1e-12);
  EXPECT_NEAR(id.y, 0.0, 1e-12);
  EXPECT_NEAR(id.theta, 0.0, 1e-12);
}

}  // namespace
}  // namespace rearrange
