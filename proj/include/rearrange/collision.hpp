#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rearrange/geometry.hpp"

namespace rearrange {

class Trajectory;

enum class FootprintMode { kRobotOnly, kRobotWithObject };

/// Footprint circles in the robot body frame.
struct CollisionModel {
  FootprintMode mode = FootprintMode::kRobotOnly;
  std::vector<Circle> circles;

  /// Three circles along the body axis at +0.35, 0, -0.35 m, radius 0.45 m.
  static CollisionModel robot_only();
  static CollisionModel robot_only(std::vector<Circle> circles);

  /// Robot circles plus one circle at the grasped object's center, given
  /// in the body frame.
  static CollisionModel robot_with_object(const CollisionModel& robot,
                                          const Vec2& object_center,
                                          double object_radius);

  /// Largest distance from the body origin to any footprint boundary point.
  double reach() const;
};

enum class ObjectStatus { kObstacle, kFree };
enum class MapPhase { kPreGrasp, kPostGrasp };

struct ObjectObstacle {
  Circle circle;
  ObjectStatus status = ObjectStatus::kObstacle;
};

struct OccupancyMap {
  std::vector<Circle> static_obstacles;
  std::map<std::string, ObjectObstacle> objects;
  Bounds bounds;
  double clearance_margin = 0.05;

  int free_count() const;
  /// Moves an object's circle (e.g. after release). Throws UNKNOWN_OBJECT.
  void place_object(const std::string& id, const Vec2& center);
};

/// True when any footprint circle at `pose` leaves the bounds or comes
/// within clearance_margin + extra_margin of an active obstacle. Touching
/// counts as a collision.
bool collision_check(const Pose2& pose, const CollisionModel& model,
                     const OccupancyMap& map, double extra_margin = 0.0);

/// Returns a copy of `map` with object statuses set for the given phase:
/// every object is an obstacle, except the active one after grasping.
OccupancyMap update_map(const OccupancyMap& map,
                        const std::optional<std::string>& active_object,
                        MapPhase phase);

/// Precomputed clearance grid over a map snapshot. Answers exactly the same
/// question as collision_check but skips the obstacle scan when the grid
/// proves the answer.
class CollisionChecker {
 public:
  CollisionChecker(const OccupancyMap& map, double extra_margin = 0.0,
                   double cell = 0.1);

  bool in_collision(const Pose2& pose, const CollisionModel& model) const;

  /// Checks the straight/arc motion of a constant twist from `pose` over
  /// length `distance` (signed) and turn `dtheta`, sampled so that no
  /// footprint point moves more than `spacing` between checks. The start
  /// pose itself is not checked.
  bool motion_in_collision(const Pose2& pose, double distance, double dtheta,
                           const CollisionModel& model, double spacing) const;

 /// Single world-frame circle against the snapshot.
  bool circle_collides(const Vec2& c, double r) const;

 private:
  bool circle_collides_exact(const Vec2& c, double r) const;

  std::vector<Circle> active_;
  Bounds bounds_;
  double margin_;
  double cell_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<float> clearance_;
};

/// Dense re-check of a trajectory: every pose along it, sampled with
/// footprint displacement at most `spacing`, must be collision free.
/// Returns the time of the first colliding pose, if any.
std::optional<double> first_collision(const Trajectory& traj,
                                      const CollisionModel& model,
                                      const OccupancyMap& map,
                                      double spacing = 0.05);

}  // namespace rearrange
