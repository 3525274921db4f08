#include "rearrange/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "rearrange/error.hpp"

namespace rearrange {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(ErrorCode::kParseError, field + ": " + what);
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

const json& require(const json& obj, const char* key, const std::string& at) {
  const json* v = find(obj, key);
  if (!v) fail(at.empty() ? key : at + "." + key, "missing");
  return *v;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  return v.get<double>();
}

void read_number(const json& obj, const char* key, const std::string& at, double& out) {
  if (const json* v = find(obj, key)) out = number(*v, at + "." + key);
}

std::vector<double> numbers(const json& v, std::size_t n, const std::string& field,
                            const char* shape) {
  if (!v.is_array() || v.size() != n) fail(field, std::string("expected ") + shape);
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

Pose2 pose(const json& v, const std::string& field) {
  const auto p = numbers(v, 3, field, "[x, y, theta]");
  return {p[0], p[1], p[2]};
}

Circle circle(const json& v, const std::string& field) {
  if (!v.is_object()) fail(field, "expected {\"center\": [x, y], \"radius\": r}");
  const auto c = numbers(require(v, "center", field), 2, field + ".center", "[x, y]");
  return {{c[0], c[1]}, number(require(v, "radius", field), field + ".radius")};
}

const json& array_at(const json& obj, const char* key, const std::string& at) {
  const json& v = require(obj, key, at);
  if (!v.is_array()) fail(at.empty() ? key : at + "." + key, "expected an array");
  return v;
}

std::string at_index(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

ordered_json pose_json(const Pose2& p) { return ordered_json::array({p.x, p.y, p.theta}); }

ordered_json circle_json(const Circle& c) {
  ordered_json j;
  j["center"] = ordered_json::array({c.center.x, c.center.y});
  j["radius"] = c.radius;
  return j;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

Scenario parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string("syntax: ") + e.what());
  }
  if (!doc.is_object()) fail("<root>", "expected an object");

  Scenario sc;
  if (const json* v = find(doc, "name")) {
    if (!v->is_string()) fail("name", "expected a string");
    sc.name = v->get<std::string>();
  }
  if (const json* v = find(doc, "seed")) {
    if (!v->is_number_unsigned()) fail("seed", "expected a non-negative integer");
    sc.seed = v->get<std::uint64_t>();
  }

  const json& world = require(doc, "world", "");
  if (!world.is_object()) fail("world", "expected an object");
  const auto b = numbers(require(world, "bounds", "world"), 4, "world.bounds",
                         "[min_x, min_y, max_x, max_y]");
  sc.world_bounds = {b[0], b[1], b[2], b[3]};
  if (find(world, "obstacles")) {
    const json& obstacles = array_at(world, "obstacles", "world");
    for (std::size_t i = 0; i < obstacles.size(); ++i) {
      sc.static_obstacles.push_back(circle(obstacles[i], at_index("world.obstacles", i)));
    }
  }
  read_number(world, "clearance_margin", "world", sc.clearance_margin);

  const json& robot = require(doc, "robot", "");
  if (!robot.is_object()) fail("robot", "expected an object");
  sc.robot_start = pose(require(robot, "start", "robot"), "robot.start");
  if (const json* limits = find(robot, "limits")) {
    if (!limits->is_object()) fail("robot.limits", "expected an object");
    read_number(*limits, "v_max", "robot.limits", sc.limits.v_max);
    read_number(*limits, "omega_max", "robot.limits", sc.limits.omega_max);
    read_number(*limits, "a_max", "robot.limits", sc.limits.a_max);
    read_number(*limits, "alpha_max", "robot.limits", sc.limits.alpha_max);
  }
  if (find(robot, "footprint")) {
    const json& fp = array_at(robot, "footprint", "robot");
    sc.footprint.clear();
    for (std::size_t i = 0; i < fp.size(); ++i) {
      sc.footprint.push_back(circle(fp[i], at_index("robot.footprint", i)));
    }
  }

  const json& objects = array_at(doc, "objects", "");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string at = at_index("objects", i);
    const json& o = objects[i];
    if (!o.is_object()) fail(at, "expected an object");
    ObjectSpec spec;
    const json& id = require(o, "id", at);
    if (!id.is_string()) fail(at + ".id", "expected a string");
    spec.id = id.get<std::string>();
    if (const json* c = find(o, "category")) {
      if (!c->is_string()) fail(at + ".category", "expected a string");
      try {
        spec.category = parse_category(c->get<std::string>());
      } catch (const Error& e) {
        throw Error(e.code(), at + ".category: " + e.what());
      }
    }
    spec.initial_pose = pose(require(o, "pose", at), at + ".pose");
    read_number(o, "radius", at, spec.collision_radius);
    if (const json* g = find(o, "grasp_offset")) spec.grasp_offset = pose(*g, at + ".grasp_offset");
    read_number(o, "mass", at, spec.mass);
    read_number(o, "friction", at, spec.friction);
    sc.objects.push_back(std::move(spec));
  }

  const json& targets = array_at(doc, "targets", "");
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const std::string at = at_index("targets", j);
    if (!targets[j].is_object()) fail(at, "expected {\"pose\": [x, y, theta]}");
    sc.targets.push_back(pose(require(targets[j], "pose", at), at + ".pose"));
  }

  validate(sc);
  return sc;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path);
}

Scenario load_scenario(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_scenario(text);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string serialize_scenario(const Scenario& sc) {
  ordered_json doc;
  doc["name"] = sc.name;
  doc["seed"] = sc.seed;
  ordered_json world;
  world["bounds"] = ordered_json::array({sc.world_bounds.min_x, sc.world_bounds.min_y,
                                         sc.world_bounds.max_x, sc.world_bounds.max_y});
  world["obstacles"] = ordered_json::array();
  for (const Circle& c : sc.static_obstacles) world["obstacles"].push_back(circle_json(c));
  world["clearance_margin"] = sc.clearance_margin;
  doc["world"] = world;

  ordered_json robot;
  robot["start"] = pose_json(sc.robot_start);
  robot["limits"] = {{"v_max", sc.limits.v_max},
                     {"omega_max", sc.limits.omega_max},
                     {"a_max", sc.limits.a_max},
                     {"alpha_max", sc.limits.alpha_max}};
  robot["footprint"] = ordered_json::array();
  for (const Circle& c : sc.footprint) robot["footprint"].push_back(circle_json(c));
  doc["robot"] = robot;

  doc["objects"] = ordered_json::array();
  for (const ObjectSpec& o : sc.objects) {
    ordered_json j;
    j["id"] = o.id;
    j["category"] = std::string(to_string(o.category));
    j["pose"] = pose_json(o.initial_pose);
    j["radius"] = o.collision_radius;
    j["grasp_offset"] = pose_json(o.grasp_offset);
    j["mass"] = o.mass;
    j["friction"] = o.friction;
    doc["objects"].push_back(j);
  }
  doc["targets"] = ordered_json::array();
  for (const Pose2& t : sc.targets) doc["targets"].push_back({{"pose", pose_json(t)}});
  return doc.dump(2) + "\n";
}

void save_scenario(const std::string& path, const Scenario& scenario) {
  write_text_file(path, serialize_scenario(scenario));
}

void write_plan(const std::string& dir, const Scenario& sc, const TaskPlan& plan,
                const PlanSummary& summary) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());
  ordered_json doc;
  doc["scenario"] = sc.name;
  doc["method"] = summary.method;
  doc["bound"] = summary.bound;
  doc["expansions"] = summary.expansions;
  doc["total_cost_s"] = plan.total_cost;
  doc["tasks"] = ordered_json::array();
  for (std::size_t k = 0; k < plan.order.size(); ++k) {
    const std::string pre = "task" + std::to_string(k) + "_pre.traj";
    const std::string post = "task" + std::to_string(k) + "_post.traj";
    ordered_json t;
    t["object"] = sc.objects.at(plan.order[k]).id;
    t["object_index"] = plan.order[k];
    t["target_index"] = plan.assignment[k];
    if (k < plan.tasks.size()) {
      t["pre"] = pre;
      t["post"] = post;
      t["pre_duration_s"] = plan.tasks[k].pre.duration();
      t["post_duration_s"] = plan.tasks[k].post.duration();
      write_trajectory_file((fs::path(dir) / pre).string(), plan.tasks[k].pre);
      write_trajectory_file((fs::path(dir) / post).string(), plan.tasks[k].post);
    }
    doc["tasks"].push_back(t);
  }
  write_text_file((fs::path(dir) / "plan.json").string(), doc.dump(2) + "\n");
}

TaskPlan read_plan(const std::string& dir, const Scenario& sc, PlanSummary* summary) {
  namespace fs = std::filesystem;
  const std::string path = (fs::path(dir) / "plan.json").string();
  json doc;
  try {
    doc = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path + ": " + e.what());
  }
  const json& tasks = array_at(doc, "tasks", "");
  if (tasks.size() != sc.size()) {
    fail(path + ": tasks", "expected " + std::to_string(sc.size()) + " tasks");
  }
  TaskPlan plan;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const std::string at = path + ": " + at_index("tasks", k);
    const json& t = tasks[k];
    auto index = [&](const char* key) {
      const json& v = require(t, key, at);
      if (!v.is_number_integer() || v.get<long long>() < 0 ||
          v.get<long long>() >= static_cast<long long>(sc.size())) {
        fail(at + "." + key, "expected an index below " + std::to_string(sc.size()));
      }
      return v.get<int>();
    };
    plan.order.push_back(index("object_index"));
    plan.assignment.push_back(index("target_index"));
    auto traj = [&](const char* key) {
      const json& v = require(t, key, at);
      if (!v.is_string()) fail(at + "." + key, "expected a file name");
      return read_trajectory_file((fs::path(dir) / v.get<std::string>()).string());
    };
    plan.tasks.push_back({traj("pre"), traj("post")});
  }
  plan.total_cost = plan_cost(plan);
  if (summary) {
    *summary = {};
    if (doc.contains("method") && doc["method"].is_string()) summary->method = doc["method"];
    if (doc.contains("bound") && doc["bound"].is_string()) summary->bound = doc["bound"];
    if (doc.contains("expansions") && doc["expansions"].is_number_unsigned()) {
      summary->expansions = doc["expansions"].get<std::size_t>();
    }
  }
  return plan;
}

std::string_view metrics_header() {
  return "scenario,method,seed,completion_time_s,total_distance_m,collisions,max_err_m,"
         "mean_err_m,successes";
}

std::string format_metrics_row(const MetricsRow& r) {
  return r.scenario + "," + r.method + "," + std::to_string(r.seed) + "," +
         format_double(r.completion_time) + "," + format_double(r.total_distance) + "," +
         std::to_string(r.collisions) + "," + format_double(r.max_error) + "," +
         format_double(r.mean_error) + "," + std::to_string(r.successes);
}

MetricsRow metrics_row(const std::string& scenario, const std::string& method,
                       std::uint64_t seed, const EpisodeResult& result) {
  MetricsRow r;
  r.scenario = scenario;
  r.method = method;
  r.seed = seed;
  r.completion_time = result.completion_time;
  r.total_distance = result.total_distance;
  r.collisions = result.collision_events;
  r.max_error = result.max_tracking_error;
  r.mean_error = result.mean_tracking_error;
  r.successes = result.successes();
  return r;
}

}  // namespace rearrange
