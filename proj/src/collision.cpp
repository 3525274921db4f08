#include "rearrange/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rearrange/error.hpp"
#include "rearrange/kinematics.hpp"
#include "rearrange/trajectory.hpp"

namespace rearrange {
namespace {

constexpr double kFastPathSlack = 1e-9;

double boundary_clearance(const Bounds& b, const Vec2& c) {
  return std::min({c.x - b.min_x, b.max_x - c.x, c.y - b.min_y,
                   b.max_y - c.y});
}

std::vector<Circle> active_obstacles(const OccupancyMap& map) {
  std::vector<Circle> out = map.static_obstacles;
  for (const auto& [id, obj] : map.objects) {
    if (obj.status == ObjectStatus::kObstacle) out.push_back(obj.circle);
  }
  return out;
}

bool circle_hits(const Vec2& c, double r, const std::vector<Circle>& obstacles,
                 const Bounds& bounds, double margin) {
  if (boundary_clearance(bounds, c) <= r + margin) return true;
  for (const Circle& o : obstacles) {
    if (distance(c, o.center) <= r + o.radius + margin) return true;
  }
  return false;
}

}  // namespace

CollisionModel CollisionModel::robot_only() {
  return robot_only({{{0.35, 0.0}, 0.45}, {{0.0, 0.0}, 0.45},
                     {{-0.35, 0.0}, 0.45}});
}

CollisionModel CollisionModel::robot_only(std::vector<Circle> circles) {
  if (circles.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "robot footprint must have exactly 3 circles");
  }
  return {FootprintMode::kRobotOnly, std::move(circles)};
}

CollisionModel CollisionModel::robot_with_object(const CollisionModel& robot,
                                                 const Vec2& object_center,
                                                 double object_radius) {
  if (robot.mode != FootprintMode::kRobotOnly || robot.circles.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "robot_with_object expects a 3-circle robot footprint");
  }
  CollisionModel out{FootprintMode::kRobotWithObject, robot.circles};
  out.circles.push_back({object_center, object_radius});
  return out;
}

double CollisionModel::reach() const {
  double r = 0.0;
  for (const Circle& c : circles) {
    r = std::max(r, std::hypot(c.center.x, c.center.y) + c.radius);
  }
  return r;
}

int OccupancyMap::free_count() const {
  return static_cast<int>(std::count_if(
      objects.begin(), objects.end(),
      [](const auto& kv) { return kv.second.status == ObjectStatus::kFree; }));
}

void OccupancyMap::place_object(const std::string& id, const Vec2& center) {
  auto it = objects.find(id);
  if (it == objects.end()) {
    throw Error(ErrorCode::kUnknownObject, "no object '" + id + "' in map");
  }
  it->second.circle.center = center;
}

bool collision_check(const Pose2& pose, const CollisionModel& model,
                     const OccupancyMap& map, double extra_margin) {
  const double margin = map.clearance_margin + extra_margin;
  const std::vector<Circle> obstacles = active_obstacles(map);
  for (const Circle& fp : model.circles) {
    if (circle_hits(transform_point(pose, fp.center), fp.radius, obstacles,
                    map.bounds, margin)) {
      return true;
    }
  }
  return false;
}

OccupancyMap update_map(const OccupancyMap& map,
                        const std::optional<std::string>& active_object,
                        MapPhase phase) {
  if (active_object && !map.objects.contains(*active_object)) {
    throw Error(ErrorCode::kUnknownObject,
                "no object '" + *active_object + "' in map");
  }
  OccupancyMap out = map;
  for (auto& [id, obj] : out.objects) {
    const bool release = phase == MapPhase::kPostGrasp && active_object &&
                         id == *active_object;
    obj.status = release ? ObjectStatus::kFree : ObjectStatus::kObstacle;
  }
  return out;
}

CollisionChecker::CollisionChecker(const OccupancyMap& map,
                                   double extra_margin, double cell)
    : active_(active_obstacles(map)),
      bounds_(map.bounds),
      margin_(map.clearance_margin + extra_margin),
      cell_(cell) {
  nx_ = std::max(1, static_cast<int>(std::ceil(bounds_.width() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(bounds_.height() / cell_)));
  clearance_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (int iy = 0; iy < ny_; ++iy) {
    for (int ix = 0; ix < nx_; ++ix) {
      const Vec2 c{bounds_.min_x + (ix + 0.5) * cell_,
                   bounds_.min_y + (iy + 0.5) * cell_};
      double clear = boundary_clearance(bounds_, c);
      for (const Circle& o : active_) {
        clear = std::min(clear, distance(c, o.center) - o.radius);
      }
      clearance_[static_cast<std::size_t>(iy) * nx_ + ix] = clear;
    }
  }
}

bool CollisionChecker::circle_collides_exact(const Vec2& c, double r) const {
  return circle_hits(c, r, active_, bounds_, margin_);
}

bool CollisionChecker::circle_collides(const Vec2& c, double r) const {
  const int ix = static_cast<int>(std::floor((c.x - bounds_.min_x) / cell_));
  const int iy = static_cast<int>(std::floor((c.y - bounds_.min_y) / cell_));
  if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return true;
  const double half_diag = cell_ * std::numbers::sqrt2 * 0.5;
  const double clear = clearance_[static_cast<std::size_t>(iy) * nx_ + ix];
  const double need = r + margin_;
  if (clear - half_diag > need + kFastPathSlack) return false;
  if (clear + half_diag < need - kFastPathSlack) return true;
  return circle_collides_exact(c, r);
}

bool CollisionChecker::in_collision(const Pose2& pose,
                                    const CollisionModel& model) const {
  for (const Circle& fp : model.circles) {
    if (circle_collides(transform_point(pose, fp.center), fp.radius)) {
      return true;
    }
  }
  return false;
}

bool CollisionChecker::motion_in_collision(const Pose2& pose, double dist,
                                           double dtheta,
                                           const CollisionModel& model,
                                           double spacing) const {
  const double sweep = std::abs(dist) + std::abs(dtheta) * model.reach();
  const int steps = std::max(1, static_cast<int>(std::ceil(sweep / spacing)));
  // A unit-duration twist covering the whole motion, sampled at fractions.
  for (int k = 1; k <= steps; ++k) {
    const double f = static_cast<double>(k) / steps;
    const Pose2 p = integrate_unicycle(pose, dist, dtheta, f);
    if (in_collision(p, model)) return true;
  }
  return false;
}

std::optional<double> first_collision(const Trajectory& traj,
                                      const CollisionModel& model,
                                      const OccupancyMap& map,
                                      double spacing) {
  if (traj.empty()) return std::nullopt;
  const auto& s = traj.samples();
  if (collision_check(s.front().pose, model, map)) return s.front().t;
  const double reach = model.reach();
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double dt = s[i + 1].t - s[i].t;
    const double sweep =
        std::abs(s[i].v * dt) + std::abs(s[i].omega * dt) * reach;
    const int steps =
        std::max(1, static_cast<int>(std::ceil(sweep / spacing)));
    for (int k = 1; k <= steps; ++k) {
      const double tau = dt * k / steps;
      const Pose2 p = integrate_unicycle(s[i].pose, s[i].v, s[i].omega, tau);
      if (collision_check(p, model, map)) return s[i].t + tau;
    }
  }
  return std::nullopt;
}

}  // namespace rearrange
