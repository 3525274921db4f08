#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rearrange/error.hpp"
#include "rearrange/rewards.hpp"

namespace rearrange {
namespace {

constexpr double kPi = std::numbers::pi;

RewardInput ideal() {
  RewardInput in;
  in.v_cmd = in.v_actual = {0.3, -0.1};
  in.omega_cmd = in.omega_actual = 0.2;
  in.d_x = 2.0;
  in.contact_forces = {Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero(), Eigen::Vector3d::Zero()};
  return in;
}

RewardInput random_input(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RewardInput in;
  in.v_cmd = {u(rng), u(rng)};
  in.v_actual = {u(rng), u(rng)};
  in.omega_cmd = u(rng);
  in.omega_actual = u(rng);
  in.yaw_object = 4.0 * u(rng);
  in.yaw_robot = 4.0 * u(rng);
  in.d_x = 0.55 + 0.05 * u(rng);
  for (int k = 0; k < 4; ++k) in.contact_forces.push_back(2.0 * Eigen::Vector3d::Random());
  for (int j = 0; j < 6; ++j) {
    in.joint_torques[j] = 30.0 * u(rng);
    in.ee_wrench[j] = 10.0 * u(rng);
    in.joint_accels[j] = 100.0 * u(rng);
    in.joint_angles[j] = u(rng);
    in.default_joint_angles[j] = u(rng);
  }
  for (int a = 0; a < 9; ++a) {
    in.action[a] = u(rng);
    in.action_prev[a] = u(rng);
    in.action_prev2[a] = u(rng);
  }
  in.v_z = u(rng);
  in.omega_xy = {u(rng), u(rng)};
  in.gravity_xy = {0.3 * u(rng), 0.3 * u(rng)};
  return in;
}

// Written out term by term with plain loops, independent of the library.
double oracle_total(const RewardInput& in) {
  const double dvx = in.v_cmd.x() - in.v_actual.x(), dvy = in.v_cmd.y() - in.v_actual.y();
  const double dw = in.omega_cmd - in.omega_actual;
  double dyaw = std::fmod(std::abs(in.yaw_object - in.yaw_robot), 2.0 * kPi);
  if (dyaw > kPi) dyaw = 2.0 * kPi - dyaw;
  double contacts = 0.0;
  for (const auto& f : in.contact_forces) {
    if (std::sqrt(f.x() * f.x() + f.y() * f.y() + f.z() * f.z()) > 1.0) contacts += 1.0;
  }
  double tau2 = 0, w2 = 0, acc2 = 0, rate2 = 0, joint2 = 0;
  for (int j = 0; j < 6; ++j) {
    tau2 += in.joint_torques[j] * in.joint_torques[j];
    w2 += in.ee_wrench[j] * in.ee_wrench[j];
    const double dq = in.joint_angles[j] - in.default_joint_angles[j];
    joint2 += dq * dq;
  }
  for (int j = 0; j < in.joint_accels.size(); ++j) acc2 += in.joint_accels[j] * in.joint_accels[j];
  for (int a = 0; a < 9; ++a) {
    const double r = in.action[a] - 2.0 * in.action_prev[a] + in.action_prev2[a];
    rate2 += r * r;
  }
  return 5.0 * std::exp(-4.0 * (dvx * dvx + dvy * dvy)) + 5.0 * std::exp(-4.0 * dw * dw) +
         5.0 * (-dyaw / kPi) - 10.0 / (1.0 + std::exp(200.0 * (in.d_x - 0.55))) -
         5.0 * contacts - 2.5e-5 * tau2 + 1.0e-3 * w2 - 2.5e-7 * acc2 - 2.0e-3 * rate2 -
         2.0 * in.v_z * in.v_z -
         0.05 * (in.omega_xy.x() * in.omega_xy.x() + in.omega_xy.y() * in.omega_xy.y()) -
         10.0 * (in.gravity_xy.x() * in.gravity_xy.x() + in.gravity_xy.y() * in.gravity_xy.y()) -
         1.0 * joint2;
}

TEST(Tracking, Examples) {
  RewardInput in = ideal();
  EXPECT_EQ(tracking_reward(in), 10.0);
  in.v_actual = in.v_cmd + Eigen::Vector2d(0.3, 0.4);
  EXPECT_NEAR(tracking_reward(in), 5.0 * std::exp(-1.0) + 5.0, 1e-12);
  EXPECT_NEAR(tracking_reward(in), 6.839, 5e-4);
  double previous = tracking_reward(in);
  for (double e = 0.6; e < 5.0; e += 0.1) {
    in.v_actual = in.v_cmd + Eigen::Vector2d(e, 0.0);
    in.omega_actual = in.omega_cmd + e;
    const double r = tracking_reward(in);
    EXPECT_LT(r, previous);
    EXPECT_GT(r, 0.0);
    previous = r;
  }
}

TEST(Collision, Examples) {
  RewardInput in = ideal();
  in.yaw_object = in.yaw_robot = 0.4;
  EXPECT_EQ(total_reward(in).row("yaw_alignment"), 0.0);
  EXPECT_GT(total_reward(in).row("distance_keeping"), -1e-12);
  EXPECT_EQ(total_reward(in).row("undesired_contact"), 0.0);

  in.d_x = RewardConfig{}.d_th;
  EXPECT_EQ(total_reward(in).row("distance_keeping"), -5.0);

  in = ideal();
  in.contact_forces[1] = {2.0, 0.0, 0.0};
  EXPECT_EQ(collision_reward(in), -5.0);
  in.contact_forces[1] = {1.0, 0.0, 0.0};  // at threshold: not a violation
  EXPECT_NEAR(collision_reward(in), 0.0, 1e-12);

  in = ideal();
  in.yaw_object = kPi - 0.1;
  in.yaw_robot = -kPi + 0.1;  // 0.2 rad apart on the circle
  EXPECT_NEAR(collision_reward(in), -5.0 * 0.2 / kPi, 1e-12);
  in.yaw_robot = in.yaw_object - kPi;
  EXPECT_NEAR(collision_reward(in), -5.0, 1e-12);
}

TEST(Collision, DistanceTermDecreasesBelowThreshold) {
  RewardInput in = ideal();
  double previous = 0.0;
  for (double d = 0.6; d > 0.5; d -= 0.005) {
    in.d_x = d;
    const double r = total_reward(in).row("distance_keeping");
    EXPECT_LT(r, previous);
    EXPECT_GT(r, -10.0);
    previous = r;
  }
}

TEST(Effort, Examples) {
  RewardInput in = ideal();
  EXPECT_EQ(effort_reward(in), 0.0);
  in.joint_torques[0] = 10.0;
  EXPECT_DOUBLE_EQ(effort_reward(in), -2.5e-3);
  in.joint_torques << 1, -2, 3, 4, 5, -6;
  const double base = effort_reward(in);
  in.joint_torques *= 2.0;
  EXPECT_DOUBLE_EQ(effort_reward(in), 4.0 * base);
}

TEST(Smoothness, Examples) {
  RewardInput in = ideal();
  in.action.setConstant(0.3);
  in.action_prev.setConstant(0.3);
  in.action_prev2.setConstant(0.3);
  EXPECT_EQ(total_reward(in).row("action_rate"), 0.0);
  in.joint_angles << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  in.default_joint_angles = in.joint_angles;
  EXPECT_EQ(smoothness_pose_reward(in), 0.0);
  in.v_z = 0.5;
  EXPECT_EQ(smoothness_pose_reward(in), -0.5);
}

TEST(Total, IdealStateGivesTen) {
  const RewardBreakdown b = total_reward(ideal());
  EXPECT_EQ(b.total, 10.0);
  for (const auto& [name, value] : b.rows) {
    if (name != "lin_vel_tracking" && name != "ang_vel_tracking") {
      EXPECT_LE(std::abs(value), 1e-12) << name;
    }
  }
  EXPECT_EQ(b.rows.size(), 13u);
}

TEST(Total, MatchesIndependentExpressionAndBookkeeping) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const RewardInput in = random_input(rng);
    const RewardBreakdown b = total_reward(in);
    double sum = 0.0;
    for (const auto& row : b.rows) sum += row.second;
    EXPECT_NEAR(sum, b.total, 1e-12);
    EXPECT_NEAR(b.total, oracle_total(in), 1e-9 * std::max(1.0, std::abs(b.total)));
    EXPECT_NEAR(b.total, tracking_reward(in) + collision_reward(in) + effort_reward(in) +
                             smoothness_pose_reward(in), 1e-12);
  }
}

TEST(Bounds, TermsStayInTheirRanges) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 5000; ++trial) {
    RewardInput in = random_input(rng);
    in.d_x = 0.3 + 0.5 * (trial % 100) / 100.0;
    const RewardBreakdown b = total_reward(in);
    for (const char* row : {"lin_vel_tracking", "ang_vel_tracking"}) {
      EXPECT_GT(b.row(row), 0.0);
      EXPECT_LE(b.row(row), 5.0);
    }
    EXPECT_GE(b.row("yaw_alignment"), -5.0);
    EXPECT_LE(b.row("yaw_alignment"), 0.0);
    EXPECT_GE(b.row("distance_keeping"), -10.0);
    EXPECT_LE(b.row("distance_keeping"), 0.0);
    const double k = -b.row("undesired_contact") / 5.0;
    EXPECT_EQ(k, std::round(k));
    EXPECT_LE(k, static_cast<double>(in.contact_forces.size()));
  }
}

TEST(Gradients, FiniteDifferencesMatch) {
  std::mt19937_64 rng(23);
  const double h = 1e-6;
  auto check = [](double analytic, double numeric) {
    // Floor: roundoff in f(x +- h) / 2h is about 1e-9 at this step size.
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-4});
    EXPECT_LE(std::abs(analytic - numeric) / scale, 1e-4) << analytic << " vs " << numeric;
  };
  for (int trial = 0; trial < 200; ++trial) {
    RewardInput in = random_input(rng);
    const Eigen::Vector3d g = tracking_reward_gradient(in);
    for (int k = 0; k < 3; ++k) {
      RewardInput plus = in, minus = in;
      if (k < 2) {
        plus.v_actual[k] += h;
        minus.v_actual[k] -= h;
      } else {
        plus.omega_actual += h;
        minus.omega_actual -= h;
      }
      check(g[k], (tracking_reward(plus) - tracking_reward(minus)) / (2 * h));
    }
    const Eigen::VectorXd ge = effort_reward_gradient(in);
    ASSERT_EQ(ge.size(), 18);
    for (int k = 0; k < 18; ++k) {
      RewardInput plus = in, minus = in;
      double* p = k < 6 ? &plus.joint_torques[k] : k < 12 ? &plus.ee_wrench[k - 6] : &plus.joint_accels[k - 12];
      double* m = k < 6 ? &minus.joint_torques[k] : k < 12 ? &minus.ee_wrench[k - 6] : &minus.joint_accels[k - 12];
      *p += h;
      *m -= h;
      check(ge[k], (effort_reward(plus) - effort_reward(minus)) / (2 * h));
    }
  }
}

TEST(Estimator, Loss) {
  EXPECT_EQ(estimator_loss({0.1, 0.2, 0.3}, {0.1, 0.2, 0.3}), 0.0);
  EXPECT_EQ(estimator_loss({1, 0, 0}, {0, 0, 0}), 1.0);
  std::mt19937_64 rng(24);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d a(n(rng), n(rng), n(rng)), b(n(rng), n(rng), n(rng));
    double sum = 0.0;
    for (int k = 0; k < 3; ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
    EXPECT_NEAR(estimator_loss(a, b), sum, 1e-14);
  }
}

TEST(Randomization, RangesAndMeans) {
  double mass_sum = 0.0;
  const int n = 100000;
  for (int seed = 0; seed < n; ++seed) {
    const RandomizationSample chair = sample_randomization(ObjectCategory::kChair, seed);
    ASSERT_GE(chair.grasp_perturbation, -0.10);
    ASSERT_LE(chair.grasp_perturbation, 0.10);
    ASSERT_GE(chair.friction, 0.1);
    ASSERT_LE(chair.friction, 0.6);
    ASSERT_GE(chair.mass, 5.0);
    ASSERT_LE(chair.mass, 15.0);
    for (double c : {chair.v_x_cmd, chair.v_y_cmd, chair.omega_cmd}) {
      ASSERT_GE(c, -0.5);
      ASSERT_LE(c, 0.5);
    }
    mass_sum += chair.mass;
  }
  EXPECT_NEAR(mass_sum / n, 10.0, 0.1);
  double table_max = 0.0, bin_max = 0.0;
  for (int seed = 0; seed < 20000; ++seed) {
    table_max = std::max(table_max, std::abs(sample_randomization("table", seed).grasp_perturbation));
    bin_max = std::max(bin_max, std::abs(sample_randomization("bin", seed).grasp_perturbation));
  }
  EXPECT_LE(table_max, 0.20);
  EXPECT_GT(table_max, 0.19);
  EXPECT_LE(bin_max, 0.15);
  EXPECT_GT(bin_max, 0.14);
}

TEST(Randomization, DeterministicAndCategoryChecked) {
  const RandomizationSample a = sample_randomization(ObjectCategory::kBin, 5);
  const RandomizationSample b = sample_randomization(ObjectCategory::kBin, 5);
  EXPECT_EQ(a.mass, b.mass);
  EXPECT_EQ(a.grasp_perturbation, b.grasp_perturbation);
  try {
    sample_randomization("sofa", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownCategory);
  }
  EXPECT_THROW(sample_randomization(ObjectCategory::kCustom, 1), Error);
}

TEST(Config, DefaultsAndJsonRoundTrip) {
  const RewardConfig d;
  EXPECT_EQ(d.lin_vel_tracking, 5.0);
  EXPECT_EQ(d.distance_keeping, -10.0);
  EXPECT_EQ(d.joint_torque, -2.5e-5);
  EXPECT_EQ(d.ee_wrench, 1.0e-3);
  EXPECT_EQ(d.joint_accel, -2.5e-7);
  EXPECT_EQ(d.roll_pitch_rate, -0.05);
  EXPECT_EQ(reward_config_from_json(reward_config_to_json(d)), d);
  RewardConfig custom;
  custom.d_th = 0.7;
  custom.orientation = -3.0;
  EXPECT_EQ(reward_config_from_json(reward_config_to_json(custom)), custom);
  EXPECT_EQ(reward_config_from_json(R"({"d_th": 0.7})").d_th, 0.7);
  EXPECT_EQ(reward_config_from_json("{}"), d);
  EXPECT_THROW(reward_config_from_json(R"({"dth": 0.7})"), Error);
  EXPECT_THROW(reward_config_from_json(R"({"d_th": "far"})"), Error);
  EXPECT_THROW(reward_config_from_json("[1"), Error);
}

}  // namespace
}  // namespace rearrange
