#include "rearrange/kinematics.hpp"

#include <cmath>

namespace rearrange {
namespace {

// sin(h)/h, stable near zero.
double sinc(double h) {
  if (std::abs(h) < 1e-4) {
    const double h2 = h * h;
    return 1.0 - h2 / 6.0 + h2 * h2 / 120.0;
  }
  return std::sin(h) / h;
}

}  // namespace

Pose2 integrate_unicycle(const Pose2& pose, double v, double omega,
                         double dt) {
  if (std::abs(omega) < kStraightTwistEpsilon) {
    return {pose.x + v * dt * std::cos(pose.theta),
            pose.y + v * dt * std::sin(pose.theta), wrap_angle(pose.theta)};
  }
  // Chord form of the circular arc: the displacement has length
  // v*dt*sinc(dtheta/2) and points along the mid-arc heading.
  const double dtheta = omega * dt;
  const double chord = v * dt * sinc(0.5 * dtheta);
  const double mid = pose.theta + 0.5 * dtheta;
  return {pose.x + chord * std::cos(mid), pose.y + chord * std::sin(mid),
          wrap_angle(pose.theta + dtheta)};
}

}  // namespace rearrange
