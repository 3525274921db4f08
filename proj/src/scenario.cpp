#include "rearrange/scenario.hpp"

#include <set>

#include "rearrange/error.hpp"
#include "rearrange/planner.hpp"

namespace rearrange {
namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument, field + ": " + why);
}

std::string indexed(const char* name, std::size_t i) {
  return std::string(name) + "[" + std::to_string(i) + "]";
}

bool circle_clear_of(const Circle& c, const std::vector<Circle>& obstacles) {
  for (const Circle& o : obstacles) {
    if (distance(c.center, o.center) <= c.radius + o.radius) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(ObjectCategory category) {
  switch (category) {
    case ObjectCategory::kBin: return "bin";
    case ObjectCategory::kChair: return "chair";
    case ObjectCategory::kTable: return "table";
    case ObjectCategory::kCustom: return "custom";
  }
  return "custom";
}

ObjectCategory parse_category(std::string_view name) {
  if (name == "bin") return ObjectCategory::kBin;
  if (name == "chair") return ObjectCategory::kChair;
  if (name == "table") return ObjectCategory::kTable;
  if (name == "custom") return ObjectCategory::kCustom;
  throw Error(ErrorCode::kUnknownCategory,
              "unknown object category '" + std::string(name) + "'");
}

void validate(const Scenario& sc) {
  const Bounds& b = sc.world_bounds;
  if (!(b.max_x > b.min_x && b.max_y > b.min_y)) {
    invalid("world.bounds", "empty rectangle");
  }
  if (sc.objects.empty()) invalid("objects", "at least one object required");
  if (sc.targets.size() != sc.objects.size()) {
    invalid("targets", "expected " + std::to_string(sc.objects.size()) +
                           " targets, got " + std::to_string(sc.targets.size()));
  }
  if (sc.limits.v_max <= 0.0) invalid("robot.limits.v_max", "must be > 0");
  if (sc.limits.omega_max <= 0.0) invalid("robot.limits.omega_max", "must be > 0");
  if (sc.footprint.size() != 3) invalid("robot.footprint", "expected 3 circles");
  if (sc.clearance_margin < 0.0) invalid("world.clearance_margin", "must be >= 0");

  std::set<std::string> ids;
  for (std::size_t i = 0; i < sc.objects.size(); ++i) {
    const ObjectSpec& o = sc.objects[i];
    const std::string at = indexed("objects", i);
    if (o.id.empty()) invalid(at + ".id", "must not be empty");
    if (!ids.insert(o.id).second) invalid(at + ".id", "duplicate id '" + o.id + "'");
    if (!(o.collision_radius > 0.0)) invalid(at + ".radius", "must be > 0");
    if (!(o.friction > 0.0 && o.friction <= 1.0)) {
      invalid(at + ".friction", "must lie in (0, 1]");
    }
    if (!(o.mass > 0.0)) invalid(at + ".mass", "must be > 0");
    // Travel costs are indexed by target alone, which needs one shared
    // grasp geometry.
    if (o.grasp_offset != sc.objects.front().grasp_offset) {
      invalid(at + ".grasp_offset", "must equal objects[0].grasp_offset");
    }
    const Circle body{position(o.initial_pose), o.collision_radius};
    if (!b.contains(body.center)) invalid(at + ".pose", "outside world bounds");
    if (!circle_clear_of(body, sc.static_obstacles)) {
      invalid(at + ".pose", "overlaps a static obstacle");
    }
  }
  for (std::size_t j = 0; j < sc.targets.size(); ++j) {
    const std::string at = indexed("targets", j);
    if (!b.contains(position(sc.targets[j]))) invalid(at, "outside world bounds");
    for (const ObjectSpec& o : sc.objects) {
      if (!circle_clear_of({position(sc.targets[j]), o.collision_radius},
                           sc.static_obstacles)) {
        invalid(at, "object '" + o.id + "' would overlap a static obstacle");
      }
    }
  }
  if (!b.contains(position(sc.robot_start))) {
    invalid("robot.start", "outside world bounds");
  }
  OccupancyMap statics;
  statics.bounds = b;
  statics.static_obstacles = sc.static_obstacles;
  statics.clearance_margin = 0.0;
  if (collision_check(sc.robot_start, robot_model(sc), statics)) {
    invalid("robot.start", "footprint overlaps a static obstacle or the bounds");
  }
}

OccupancyMap initial_map(const Scenario& sc) {
  OccupancyMap map;
  map.bounds = sc.world_bounds;
  map.static_obstacles = sc.static_obstacles;
  map.clearance_margin = sc.clearance_margin;
  for (const ObjectSpec& o : sc.objects) {
    map.objects[o.id] = {{position(o.initial_pose), o.collision_radius},
                         ObjectStatus::kObstacle};
  }
  return map;
}

CollisionModel robot_model(const Scenario& sc) {
  return CollisionModel::robot_only(sc.footprint);
}

CollisionModel held_model(const Scenario& sc, std::size_t object) {
  const ObjectSpec& o = sc.objects.at(object);
  const Pose2 center = inverse(o.grasp_offset);
  return CollisionModel::robot_with_object(robot_model(sc), position(center),
                                           o.collision_radius);
}

Pose2 pre_grasp_pose(const Scenario& sc, std::size_t object) {
  const ObjectSpec& o = sc.objects.at(object);
  return pre_grasp_pose(o.initial_pose, o.grasp_offset);
}

Pose2 release_pose(const Scenario& sc, std::size_t object, std::size_t target) {
  return pre_grasp_pose(sc.targets.at(target), sc.objects.at(object).grasp_offset);
}

}  // namespace rearrange
