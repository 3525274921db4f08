#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rearrange/collision.hpp"
#include "rearrange/geometry.hpp"
#include "rearrange/kinematics.hpp"
#include "rearrange/trajectory.hpp"

namespace rearrange {

struct PlannerConfig {
  double resolution = 0.1;       // closed-set cell size, meters
  int heading_bins = 16;
  bool allow_backward = true;
  double check_spacing = 0.05;   // max footprint displacement between checks
  double sample_spacing = 0.05;  // trajectory sample spacing (m or rad)
  double goal_tolerance_xy = 0.05;
  double goal_tolerance_theta = 0.05;
  double heuristic_weight = 1.0;
  // Also bound the remaining length by an obstacle-aware grid distance.
  bool grid_heuristic = true;
  // Added to the search cost whenever the motion direction changes, since
  // the velocity profile has to stop there.
  double direction_switch_penalty = 0.5;
  double analytic_radius = 1.5;  // always try the direct connection inside
  int analytic_every = 16;       // otherwise every n-th expansion
  std::size_t max_expansions = 400000;
};

/// A constant-curvature piece of a path. Translations carry a signed length
/// (negative = backward) and a curvature; rotations in place carry a signed
/// angle.
struct PathSegment {
  enum class Kind { kTranslate, kRotate };
  Kind kind = Kind::kTranslate;
  double length = 0.0;
  double curvature = 0.0;
  double angle = 0.0;

  static PathSegment translate(double length, double curvature = 0.0) {
    return {Kind::kTranslate, length, curvature, 0.0};
  }
  static PathSegment rotate(double angle) {
    return {Kind::kRotate, 0.0, 0.0, angle};
  }
};

/// Turns a segment path into a time-parameterized trajectory. Consecutive
/// segments moving in the same direction share one trapezoidal speed
/// profile (limited by v_max, a_max and omega_max/|curvature|); every
/// direction change or rotation in place starts from rest. Poses are
/// produced by integrating the stored controls, so the result is
/// kinematically consistent by construction.
Trajectory profile_path(const Pose2& start,
                        const std::vector<PathSegment>& segments,
                        const MotionLimits& limits, double sample_spacing);

/// Robot pose from which the object can be grasped: the grasp offset
/// composed onto the object pose in the object frame.
Pose2 pre_grasp_pose(const Pose2& object_pose, const Pose2& grasp_offset);

/// Inverse relation: the object pose implied by a robot pose while grasped.
Pose2 held_object_pose(const Pose2& robot_pose, const Pose2& grasp_offset);

/// Lattice search over (x, y, heading) with constant-twist primitives
/// (straight and arcs at +-omega_max and +-omega_max/2, forward and
/// backward, plus in-place turns), a time heuristic from the larger of the
/// straight-line and obstacle-aware grid distances, and a turn-drive-turn connection to the exact goal pose.
class TrajectoryPlanner {
 public:
  explicit TrajectoryPlanner(MotionLimits limits = {},
                             PlannerConfig config = {});

  /// Throws GOAL_IN_COLLISION, START_IN_COLLISION or NO_PATH_FOUND.
  Trajectory plan(const Pose2& start, const Pose2& goal,
                  const CollisionModel& model, const OccupancyMap& map) const;

  struct Stats {
    std::size_t expansions = 0;
  };
  Trajectory plan(const Pose2& start, const Pose2& goal,
                  const CollisionModel& model, const OccupancyMap& map,
                  Stats* stats) const;

  const MotionLimits& limits() const { return limits_; }
  const PlannerConfig& config() const { return config_; }

 private:
  MotionLimits limits_;
  PlannerConfig config_;
};

Trajectory plan_se2(const Pose2& start, const Pose2& goal,
                    const CollisionModel& model, const OccupancyMap& map,
                    const MotionLimits& limits,
                    const PlannerConfig& config = {});

struct CoarseToFineResult {
  Trajectory coarse;  // empty when the robot starts inside the trigger radius
  Trajectory fine;
  Pose2 trigger_pose;
};

inline constexpr double kDetectionRadius = 5.0;

/// Approach trajectory toward the estimated object, cut at the first sample
/// within kDetectionRadius of it, then a re-plan from there to the pre-grasp
/// pose of the detected object. When `active_object` is set, that object's
/// circle is moved to the detected pose before the fine stage.
CoarseToFineResult coarse_to_fine(
    const Pose2& robot, const Pose2& approx_object_pose,
    const Pose2& true_object_pose, const Pose2& grasp_offset,
    const OccupancyMap& map, const CollisionModel& model,
    const TrajectoryPlanner& planner,
    const std::optional<std::string>& active_object = std::nullopt);

}  // namespace rearrange
