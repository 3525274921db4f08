#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rearrange/collision.hpp"
#include "rearrange/geometry.hpp"
#include "rearrange/kinematics.hpp"

namespace rearrange {

enum class ObjectCategory { kBin, kChair, kTable, kCustom };

std::string_view to_string(ObjectCategory category);
/// Throws UNKNOWN_CATEGORY.
ObjectCategory parse_category(std::string_view name);

struct ObjectSpec {
  std::string id;
  ObjectCategory category = ObjectCategory::kCustom;
  Pose2 initial_pose;
  double collision_radius = 0.3;
  /// Robot grasp pose in the object frame; its pre-grasp pose is
  /// initial_pose ⊕ grasp_offset.
  Pose2 grasp_offset{-1.3, 0.0, 0.0};
  double mass = 10.0;
  double friction = 0.5;

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

/// Robot state in the symbolic task model: configuration plus the id of the
/// held object, if any.
struct RobotState {
  Pose2 config;
  std::optional<std::string> holding;
};

struct Scenario {
  std::string name;
  Pose2 robot_start;
  std::vector<ObjectSpec> objects;
  /// Object poses at release; targets[j] is location tl_j.
  std::vector<Pose2> targets;
  std::vector<Circle> static_obstacles;
  Bounds world_bounds;
  MotionLimits limits;
  /// Robot-only footprint circles in the body frame.
  std::vector<Circle> footprint = CollisionModel::robot_only().circles;
  double clearance_margin = 0.05;
  std::uint64_t seed = 0;

  std::size_t size() const { return objects.size(); }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Checks the scenario invariants; throws INVALID_ARGUMENT naming the
/// offending field (e.g. "objects[2].friction").
void validate(const Scenario& scenario);

/// Map with static obstacles and every object at its initial pose.
OccupancyMap initial_map(const Scenario& scenario);

CollisionModel robot_model(const Scenario& scenario);

/// Robot plus held object `object` (index into scenario.objects).
CollisionModel held_model(const Scenario& scenario, std::size_t object);

Pose2 pre_grasp_pose(const Scenario& scenario, std::size_t object);

/// Robot pose that leaves `object` exactly at target `target`.
Pose2 release_pose(const Scenario& scenario, std::size_t object,
                   std::size_t target);

}  // namespace rearrange
