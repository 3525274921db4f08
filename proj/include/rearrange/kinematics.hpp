#pragma once

#include "rearrange/geometry.hpp"

namespace rearrange {

struct MotionLimits {
  double v_max = 1.0;      // m/s
  double omega_max = 1.0;  // rad/s
  double a_max = 1.0;      // m/s^2, used by velocity profiling
  double alpha_max = 2.0;  // rad/s^2

  friend bool operator==(const MotionLimits&, const MotionLimits&) = default;
};

/// Below this yaw rate a twist is integrated as a straight line.
inline constexpr double kStraightTwistEpsilon = 1e-9;

/// Exact integration of a constant twist (v, omega) over dt under the
/// differential-drive model x' = v cos(theta), y' = v sin(theta),
/// theta' = omega.
Pose2 integrate_unicycle(const Pose2& pose, double v, double omega, double dt);

}  // namespace rearrange
