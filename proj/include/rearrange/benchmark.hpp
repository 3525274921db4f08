#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rearrange/planner.hpp"
#include "rearrange/scenario.hpp"
#include "rearrange/sim.hpp"
#include "rearrange/task_planner.hpp"

namespace rearrange {

enum class PlanMethod { kGreedy, kBnb };

std::string_view to_string(PlanMethod method);
PlanMethod parse_plan_method(std::string_view name);

struct PlanOutcome {
  TaskPlan plan;
  std::size_t expansions = 0;  // branch-and-bound nodes; 0 for greedy
};

/// Plans a scenario with the given cost matrices. BnB is warm-started from
/// the greedy plan.
PlanOutcome plan_with(const CostMatrices& costs, PlanMethod method,
                      const BnbOptions& options = {});

/// Builds the cost matrices with the scenario's limits and plans.
PlanOutcome plan_scenario(const Scenario& scenario, PlanMethod method,
                          const BnbOptions& options = {},
                          const PlannerConfig& config = {});

/// Linear MAE from the flag; angular MAE keeps its calibrated ratio to it.
/// The noise seed mixes the scenario seed with the run seed.
NoiseModel noise_for_run(double mae_v, std::uint64_t scenario_seed, std::uint64_t run_seed);

struct BenchmarkOptions {
  std::vector<PlanMethod> methods = {PlanMethod::kGreedy, PlanMethod::kBnb};
  std::vector<std::uint64_t> seeds;
  double noise_mae = NoiseModel{}.mae_v;
  BnbOptions bnb;
  TrackerConfig tracker;
};

struct BenchmarkRow {
  std::string scenario;
  std::string method;
  std::uint64_t seed = 0;
  double plan_cost = 0.0;
  double completion_time = 0.0;
  double total_distance = 0.0;
  int collisions = 0;
  double max_error = 0.0;
  double mean_error = 0.0;
  int successes = 0;
  int objects = 0;
  std::string status = "ok";  // ok | collision | divergence | infeasible | error
};

struct BenchmarkAggregate {
  std::string scenario;
  std::string method;
  int runs = 0;
  double mean_completion_time = 0.0;
  double sd_completion_time = 0.0;
  double mean_total_distance = 0.0;
  double sd_total_distance = 0.0;
  double mean_plan_cost = 0.0;
  double success_rate = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<BenchmarkAggregate> aggregates;
  /// Scenarios where mean BnB completion time exceeds the greedy mean.
  std::vector<std::string> violations;

  const BenchmarkAggregate* find(std::string_view scenario, std::string_view method) const;
  std::string to_csv() const;
};

/// Runs every (scenario, method, seed). Per-run failures are recorded in the
/// row status; rows are sorted by scenario, method, seed.
BenchmarkReport run_benchmark(const std::vector<Scenario>& scenarios,
                              const BenchmarkOptions& options);

/// Sorted file paths matching a shell pattern; throws IO_ERROR on no match.
std::vector<std::string> expand_glob(const std::string& pattern);

}  // namespace rearrange
