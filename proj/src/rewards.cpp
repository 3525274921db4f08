#include "rearrange/rewards.hpp"

#include <cmath>
#include <json.hpp>
#include <numbers>
#include <random>

#include "rearrange/error.hpp"

namespace rearrange {
namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <typename F>
void for_each_field(RewardConfig& c, F&& f) {
  f("lin_vel_tracking", c.lin_vel_tracking);
  f("ang_vel_tracking", c.ang_vel_tracking);
  f("yaw_alignment", c.yaw_alignment);
  f("distance_keeping", c.distance_keeping);
  f("undesired_contact", c.undesired_contact);
  f("joint_torque", c.joint_torque);
  f("ee_wrench", c.ee_wrench);
  f("joint_accel", c.joint_accel);
  f("action_rate", c.action_rate);
  f("vertical_velocity", c.vertical_velocity);
  f("roll_pitch_rate", c.roll_pitch_rate);
  f("orientation", c.orientation);
  f("default_joint", c.default_joint);
  f("d_th", c.d_th);
  f("sigmoid_steepness", c.sigmoid_steepness);
  f("contact_threshold", c.contact_threshold);
}

struct Terms {
  double lin, ang, yaw, dist, contact, torque, wrench, accel, rate, vz, wxy, orient, joint;
};

Terms evaluate(const RewardInput& in, const RewardConfig& c) {
  Terms t{};
  t.lin = c.lin_vel_tracking * std::exp(-4.0 * (in.v_cmd - in.v_actual).squaredNorm());
  const double dw = in.omega_cmd - in.omega_actual;
  t.ang = c.ang_vel_tracking * std::exp(-4.0 * dw * dw);
  t.yaw = c.yaw_alignment * (-yaw_difference(in.yaw_object, in.yaw_robot) / std::numbers::pi);
  t.dist = c.distance_keeping * sigmoid(-c.sigmoid_steepness * (in.d_x - c.d_th));
  int violations = 0;
  for (const Eigen::Vector3d& f : in.contact_forces) {
    if (f.norm() > c.contact_threshold) ++violations;
  }
  t.contact = c.undesired_contact * violations;
  t.torque = c.joint_torque * in.joint_torques.squaredNorm();
  t.wrench = c.ee_wrench * in.ee_wrench.squaredNorm();
  t.accel = c.joint_accel * in.joint_accels.squaredNorm();
  t.rate = c.action_rate * (in.action - 2.0 * in.action_prev + in.action_prev2).squaredNorm();
  t.vz = c.vertical_velocity * in.v_z * in.v_z;
  t.wxy = c.roll_pitch_rate * in.omega_xy.squaredNorm();
  t.orient = c.orientation * in.gravity_xy.squaredNorm();
  t.joint = c.default_joint * (in.joint_angles - in.default_joint_angles).squaredNorm();
  return t;
}

}  // namespace

std::string reward_config_to_json(const RewardConfig& cfg) {
  nlohmann::ordered_json j;
  RewardConfig copy = cfg;
  for_each_field(copy, [&](const char* key, double& v) { j[key] = v; });
  return j.dump(2);
}

RewardConfig reward_config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("reward config: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParseError, "reward config: expected an object");
  RewardConfig cfg;
  std::size_t matched = 0;
  for_each_field(cfg, [&](const char* key, double& v) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) {
      throw Error(ErrorCode::kParseError, std::string("reward config.") + key + ": expected a number");
    }
    v = j[key].get<double>();
    ++matched;
  });
  if (matched != j.size()) {
    for (const auto& [key, value] : j.items()) {
      bool known = false;
      for_each_field(cfg, [&](const char* k, double&) { known = known || key == k; });
      if (!known) throw Error(ErrorCode::kParseError, "reward config." + key + ": unknown key");
    }
  }
  return cfg;
}

double yaw_difference(double a, double b) { return std::abs(wrap_angle(a - b)); }

double tracking_reward(const RewardInput& in, const RewardConfig& cfg) {
  const Terms t = evaluate(in, cfg);
  return t.lin + t.ang;
}

double collision_reward(const RewardInput& in, const RewardConfig& cfg) {
  const Terms t = evaluate(in, cfg);
  return t.yaw + t.dist + t.contact;
}

double effort_reward(const RewardInput& in, const RewardConfig& cfg) {
  const Terms t = evaluate(in, cfg);
  return t.torque + t.wrench + t.accel;
}

double smoothness_pose_reward(const RewardInput& in, const RewardConfig& cfg) {
  const Terms t = evaluate(in, cfg);
  return t.rate + t.vz + t.wxy + t.orient + t.joint;
}

double RewardBreakdown::row(std::string_view name) const {
  for (const auto& [key, value] : rows) {
    if (key == name) return value;
  }
  throw Error(ErrorCode::kInvalidArgument, "no reward row '" + std::string(name) + "'");
}

RewardBreakdown total_reward(const RewardInput& in, const RewardConfig& cfg) {
  const Terms t = evaluate(in, cfg);
  RewardBreakdown b;
  b.rows = {{"lin_vel_tracking", t.lin},  {"ang_vel_tracking", t.ang},
            {"yaw_alignment", t.yaw},     {"distance_keeping", t.dist},
            {"undesired_contact", t.contact}, {"joint_torque", t.torque},
            {"ee_wrench", t.wrench},      {"joint_accel", t.accel},
            {"action_rate", t.rate},      {"vertical_velocity", t.vz},
            {"roll_pitch_rate", t.wxy},   {"orientation", t.orient},
            {"default_joint", t.joint}};
  b.total = tracking_reward(in, cfg) + collision_reward(in, cfg) + effort_reward(in, cfg) +
            smoothness_pose_reward(in, cfg);
  return b;
}

Eigen::Vector3d tracking_reward_gradient(const RewardInput& in, const RewardConfig& cfg) {
  const Eigen::Vector2d e = in.v_cmd - in.v_actual;
  const double lin = cfg.lin_vel_tracking * std::exp(-4.0 * e.squaredNorm());
  const double dw = in.omega_cmd - in.omega_actual;
  const double ang = cfg.ang_vel_tracking * std::exp(-4.0 * dw * dw);
  // d/dv_actual exp(-4|v* - v|^2) = 8 (v* - v) exp(...)
  return {8.0 * e.x() * lin, 8.0 * e.y() * lin, 8.0 * dw * ang};
}

Eigen::VectorXd effort_reward_gradient(const RewardInput& in, const RewardConfig& cfg) {
  Eigen::VectorXd g(12 + in.joint_accels.size());
  g.segment<6>(0) = 2.0 * cfg.joint_torque * in.joint_torques;
  g.segment<6>(6) = 2.0 * cfg.ee_wrench * in.ee_wrench;
  g.tail(in.joint_accels.size()) = 2.0 * cfg.joint_accel * in.joint_accels;
  return g;
}

double estimator_loss(const Eigen::Vector3d& estimate, const Eigen::Vector3d& truth) {
  return (estimate - truth).squaredNorm();
}

double grasp_perturbation_limit(ObjectCategory category) {
  switch (category) {
    case ObjectCategory::kChair: return 0.10;
    case ObjectCategory::kTable: return 0.20;
    case ObjectCategory::kBin: return 0.15;
    case ObjectCategory::kCustom: break;
  }
  throw Error(ErrorCode::kUnknownCategory,
              "no randomization ranges for category '" + std::string(to_string(category)) + "'");
}

RandomizationSample sample_randomization(ObjectCategory category, std::uint64_t seed) {
  const double grasp = grasp_perturbation_limit(category);
  std::mt19937_64 rng(seed);
  auto uniform = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  RandomizationSample s;
  s.grasp_perturbation = uniform(-grasp, grasp);
  s.friction = uniform(kFrictionRange[0], kFrictionRange[1]);
  s.mass = uniform(kMassRange[0], kMassRange[1]);
  s.v_x_cmd = uniform(-kCommandLimit, kCommandLimit);
  s.v_y_cmd = uniform(-kCommandLimit, kCommandLimit);
  s.omega_cmd = uniform(-kCommandLimit, kCommandLimit);
  return s;
}

RandomizationSample sample_randomization(std::string_view category, std::uint64_t seed) {
  return sample_randomization(parse_category(category), seed);
}

}  // namespace rearrange
