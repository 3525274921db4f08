#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "rearrange/scenario.hpp"
#include "rearrange/sim.hpp"
#include "rearrange/task_planner.hpp"

namespace rearrange {

/// Scenario document:
///   {"name", "seed",
///    "world": {"bounds": [min_x, min_y, max_x, max_y],
///              "obstacles": [{"center": [x, y], "radius": r}],
///              "clearance_margin"},
///    "robot": {"start": [x, y, theta],
///              "limits": {"v_max", "omega_max", "a_max", "alpha_max"},
///              "footprint": [{"center": [x, y], "radius": r} x3]},
///    "objects": [{"id", "category", "pose", "radius", "grasp_offset",
///                 "mass", "friction"}],
///    "targets": [{"pose": [x, y, theta]}]}
/// Optional keys fall back to the Scenario defaults. Errors are PARSE_ERROR
/// with the offending field path (or line/column for syntax errors);
/// semantic violations come from validate().
Scenario parse_scenario(std::string_view text);
Scenario load_scenario(const std::string& path);
std::string serialize_scenario(const Scenario& scenario);
void save_scenario(const std::string& path, const Scenario& scenario);

struct PlanSummary {
  std::string method;
  std::string bound;
  std::size_t expansions = 0;
};

/// Writes `dir/plan.json` plus `task<k>_pre.traj` / `task<k>_post.traj`.
void write_plan(const std::string& dir, const Scenario& scenario, const TaskPlan& plan,
                const PlanSummary& summary);

/// Reads a plan directory back; total_cost is recomputed from the loaded
/// trajectories. The stored summary is copied to `summary` when given.
TaskPlan read_plan(const std::string& dir, const Scenario& scenario,
                   PlanSummary* summary = nullptr);

struct MetricsRow {
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  double completion_time = 0.0;
  double total_distance = 0.0;
  int collisions = 0;
  double max_error = 0.0;
  double mean_error = 0.0;
  int successes = 0;
};

std::string_view metrics_header();
std::string format_metrics_row(const MetricsRow& row);
MetricsRow metrics_row(const std::string& scenario, const std::string& method,
                       std::uint64_t seed, const EpisodeResult& result);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace rearrange
