#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rearrange/scenario.hpp"

namespace rearrange {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Vector9d = Eigen::Matrix<double, 9, 1>;

struct RewardInput {
  Eigen::Vector2d v_cmd = Eigen::Vector2d::Zero();
  Eigen::Vector2d v_actual = Eigen::Vector2d::Zero();
  double omega_cmd = 0.0;
  double omega_actual = 0.0;
  double yaw_object = 0.0;
  double yaw_robot = 0.0;
  double d_x = 1.0;  // end effector ahead of the base, meters
  std::vector<Eigen::Vector3d> contact_forces;  // one per undesired-contact body
  Vector6d joint_torques = Vector6d::Zero();
  Eigen::VectorXd joint_accels = Eigen::VectorXd::Zero(6);
  Vector6d ee_wrench = Vector6d::Zero();
  Vector9d action = Vector9d::Zero();
  Vector9d action_prev = Vector9d::Zero();
  Vector9d action_prev2 = Vector9d::Zero();
  double v_z = 0.0;
  Eigen::Vector2d omega_xy = Eigen::Vector2d::Zero();
  Eigen::Vector2d gravity_xy = Eigen::Vector2d::Zero();
  Vector6d joint_angles = Vector6d::Zero();
  Vector6d default_joint_angles = Vector6d::Zero();
};

struct RewardConfig {
  double lin_vel_tracking = 5.0;
  double ang_vel_tracking = 5.0;
  double yaw_alignment = 5.0;
  double distance_keeping = -10.0;
  double undesired_contact = -5.0;
  double joint_torque = -2.5e-5;
  double ee_wrench = 1.0e-3;
  double joint_accel = -2.5e-7;
  double action_rate = -2.0e-3;
  double vertical_velocity = -2.0;
  double roll_pitch_rate = -0.05;
  double orientation = -10.0;
  double default_joint = -1.0;
  /// Distance threshold of the keep-in-front term. Not given by the
  /// original formulation; 0.55 m sits between the body extent and the
  /// end-effector reach of the default footprint.
  double d_th = 0.55;
  double sigmoid_steepness = 200.0;
  double contact_threshold = 1.0;  // N

  friend bool operator==(const RewardConfig&, const RewardConfig&) = default;
};

std::string reward_config_to_json(const RewardConfig& cfg);
/// Missing keys keep their defaults; unknown keys or non-numbers raise
/// PARSE_ERROR naming the key.
RewardConfig reward_config_from_json(std::string_view text);

/// Shortest angular distance, in [0, pi].
double yaw_difference(double a, double b);

double tracking_reward(const RewardInput& in, const RewardConfig& cfg = {});
double collision_reward(const RewardInput& in, const RewardConfig& cfg = {});
double effort_reward(const RewardInput& in, const RewardConfig& cfg = {});
double smoothness_pose_reward(const RewardInput& in, const RewardConfig& cfg = {});

struct RewardBreakdown {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> rows;  // one per reward row

  double row(std::string_view name) const;
};

RewardBreakdown total_reward(const RewardInput& in, const RewardConfig& cfg = {});

/// d tracking / d (v_actual.x, v_actual.y, omega_actual).
Eigen::Vector3d tracking_reward_gradient(const RewardInput& in, const RewardConfig& cfg = {});

/// d effort / d (joint_torques, ee_wrench, joint_accels), concatenated.
Eigen::VectorXd effort_reward_gradient(const RewardInput& in, const RewardConfig& cfg = {});

/// Squared L2 error of the object-velocity estimate.
double estimator_loss(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth);

struct RandomizationSample {
  double grasp_perturbation = 0.0;  // meters along the graspable edge
  double friction = 0.5;
  double mass = 10.0;
  double v_x_cmd = 0.0;
  double v_y_cmd = 0.0;
  double omega_cmd = 0.0;
};

inline constexpr double kFrictionRange[2] = {0.1, 0.6};
inline constexpr double kMassRange[2] = {5.0, 15.0};
inline constexpr double kCommandLimit = 0.5;

/// Half-width of the grasp perturbation for bin, chair and table; throws
/// UNKNOWN_CATEGORY otherwise.
double grasp_perturbation_limit(ObjectCategory category);

/// Uniform draws within the per-category ranges; deterministic per seed.
RandomizationSample sample_randomization(ObjectCategory category, std::uint64_t seed);
RandomizationSample sample_randomization(std::string_view category, std::uint64_t seed);

}  // namespace rearrange
