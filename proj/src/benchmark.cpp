#include "rearrange/benchmark.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <tuple>

#include "rearrange/error.hpp"

namespace rearrange {
namespace {

std::string fixed(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

void mean_sd(const std::vector<double>& xs, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  for (double x : xs) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::string_view to_string(PlanMethod method) {
  return method == PlanMethod::kGreedy ? "greedy" : "bnb";
}

PlanMethod parse_plan_method(std::string_view name) {
  if (name == "greedy") return PlanMethod::kGreedy;
  if (name == "bnb") return PlanMethod::kBnb;
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + std::string(name) + "'");
}

PlanOutcome plan_with(const CostMatrices& costs, PlanMethod method, const BnbOptions& options) {
  PlanOutcome out;
  TaskPlan greedy = greedy_plan(costs);
  if (method == PlanMethod::kGreedy) {
    out.plan = std::move(greedy);
    return out;
  }
  BnbResult r = branch_and_bound(costs, greedy, options);
  out.plan = std::move(r.plan);
  out.expansions = r.expansions;
  return out;
}

PlanOutcome plan_scenario(const Scenario& scenario, PlanMethod method,
                          const BnbOptions& options, const PlannerConfig& config) {
  const TrajectoryPlanner planner(scenario.limits, config);
  return plan_with(build_cost_matrices(scenario, planner), method, options);
}

NoiseModel noise_for_run(double mae_v, std::uint64_t scenario_seed, std::uint64_t run_seed) {
  const NoiseModel calibrated;
  NoiseModel m;
  m.mae_v = mae_v;
  m.mae_omega = calibrated.mae_omega * (mae_v / calibrated.mae_v);
  m.sd_v = calibrated.sd_v * (mae_v / calibrated.mae_v);
  m.seed = scenario_seed * 0x9E3779B97F4A7C15ULL + run_seed;
  return m;
}

const BenchmarkAggregate* BenchmarkReport::find(std::string_view scenario,
                                                std::string_view method) const {
  for (const BenchmarkAggregate& a : aggregates) {
    if (a.scenario == scenario && a.method == method) return &a;
  }
  return nullptr;
}

BenchmarkReport run_benchmark(const std::vector<Scenario>& scenarios,
                              const BenchmarkOptions& options) {
  if (scenarios.empty()) throw Error(ErrorCode::kInvalidArgument, "no scenarios");
  BenchmarkReport report;
  for (const Scenario& sc : scenarios) {
    std::optional<CostMatrices> costs;
    std::string cost_error;
    try {
      const TrajectoryPlanner planner(sc.limits);
      costs = build_cost_matrices(sc, planner);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kPlanningInfeasible) throw;
      cost_error = "infeasible";
    }
    for (PlanMethod method : options.methods) {
      std::optional<PlanOutcome> planned;
      if (costs) {
        try {
          planned = plan_with(*costs, method, options.bnb);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kPlanningInfeasible) throw;
        }
      }
      for (std::uint64_t seed : options.seeds) {
        BenchmarkRow row;
        row.scenario = sc.name;
        row.method = std::string(to_string(method));
        row.seed = seed;
        row.objects = static_cast<int>(sc.size());
        if (!planned) {
          row.status = "infeasible";
          report.rows.push_back(row);
          continue;
        }
        row.plan_cost = planned->plan.total_cost;
        EpisodeResult result;
        try {
          result = run_episode(sc, planned->plan, options.tracker,
                               noise_for_run(options.noise_mae, sc.seed, seed));
        } catch (const CollisionAbort& e) {
          result = e.partial();
          row.status = "collision";
        } catch (const Error& e) {
          row.status = e.code() == ErrorCode::kDivergence ? "divergence" : "error";
        }
        row.completion_time = result.completion_time;
        row.total_distance = result.total_distance;
        row.collisions = result.collision_events;
        row.max_error = result.max_tracking_error;
        row.mean_error = result.mean_tracking_error;
        row.successes = result.successes();
        report.rows.push_back(row);
      }
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const BenchmarkRow& a, const BenchmarkRow& b) {
                     return std::tie(a.scenario, a.method, a.seed) <
                            std::tie(b.scenario, b.method, b.seed);
                   });

  std::map<std::pair<std::string, std::string>, std::vector<const BenchmarkRow*>> groups;
  for (const BenchmarkRow& r : report.rows) groups[{r.scenario, r.method}].push_back(&r);
  for (const auto& [key, rows] : groups) {
    BenchmarkAggregate a;
    a.scenario = key.first;
    a.method = key.second;
    a.runs = static_cast<int>(rows.size());
    std::vector<double> times, distances;
    double cost = 0.0, successes = 0.0, objects = 0.0;
    for (const BenchmarkRow* r : rows) {
      times.push_back(r->completion_time);
      distances.push_back(r->total_distance);
      cost += r->plan_cost;
      successes += r->successes;
      objects += r->objects;
    }
    mean_sd(times, a.mean_completion_time, a.sd_completion_time);
    mean_sd(distances, a.mean_total_distance, a.sd_total_distance);
    a.mean_plan_cost = cost / static_cast<double>(rows.size());
    a.success_rate = objects > 0.0 ? successes / objects : 0.0;
    report.aggregates.push_back(a);
  }
  for (const Scenario& sc : scenarios) {
    const BenchmarkAggregate* bnb = report.find(sc.name, "bnb");
    const BenchmarkAggregate* greedy = report.find(sc.name, "greedy");
    if (bnb && greedy && bnb->mean_completion_time > greedy->mean_completion_time) {
      report.violations.push_back(sc.name);
    }
  }
  return report;
}

std::string BenchmarkReport::to_csv() const {
  std::string out =
      "scenario,method,seed,plan_cost_s,completion_time_s,total_distance_m,collisions,"
      "max_err_m,mean_err_m,successes,status\n";
  for (const BenchmarkRow& r : rows) {
    out += r.scenario + "," + r.method + "," + std::to_string(r.seed) + "," +
           fixed(r.plan_cost) + "," + fixed(r.completion_time) + "," +
           fixed(r.total_distance) + "," + std::to_string(r.collisions) + "," +
           fixed(r.max_error) + "," + fixed(r.mean_error) + "," +
           std::to_string(r.successes) + "," + r.status + "\n";
  }
  out +=
      "\nscenario,method,runs,mean_completion_time_s,sd_completion_time_s,"
      "mean_total_distance_m,sd_total_distance_m,mean_plan_cost_s,success_rate\n";
  for (const BenchmarkAggregate& a : aggregates) {
    out += a.scenario + "," + a.method + "," + std::to_string(a.runs) + "," +
           fixed(a.mean_completion_time) + "," + fixed(a.sd_completion_time) + "," +
           fixed(a.mean_total_distance) + "," + fixed(a.sd_total_distance) + "," +
           fixed(a.mean_plan_cost) + "," + fixed(a.success_rate) + "\n";
  }
  out += "\nscenario,bnb_time_le_greedy\n";
  std::vector<std::string> scenarios;
  for (const BenchmarkAggregate& a : aggregates) {
    if (scenarios.empty() || scenarios.back() != a.scenario) scenarios.push_back(a.scenario);
  }
  for (const std::string& s : scenarios) {
    if (!find(s, "bnb") || !find(s, "greedy")) continue;
    const bool bad = std::find(violations.begin(), violations.end(), s) != violations.end();
    out += s + "," + (bad ? "VIOLATION" : "ok") + "\n";
  }
  return out;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<std::string> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  if (out.empty()) throw Error(ErrorCode::kIoError, "no files match '" + pattern + "'");
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rearrange
