#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rearrange/benchmark.hpp"
#include "rearrange/error.hpp"
#include "rearrange/io.hpp"

using namespace rearrange;

namespace {

enum Exit : int {
  kOk = 0,
  kHarness = 1,
  kInput = 2,
  kInfeasible = 3,
  kCollision = 4,
  kDiverged = 5,
  kBoundViolated = 6,
};

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParseError:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnknownCategory:
    case ErrorCode::kUnknownObject:
    case ErrorCode::kIoError:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kMalformedState:
      return kInput;
    case ErrorCode::kPlanningInfeasible:
    case ErrorCode::kInfeasibleAssignment:
    case ErrorCode::kNoPathFound:
    case ErrorCode::kGoalInCollision:
    case ErrorCode::kStartInCollision:
      return kInfeasible;
    case ErrorCode::kCollisionAbort:
      return kCollision;
    case ErrorCode::kDivergence:
      return kDiverged;
    case ErrorCode::kBoundViolation:
      return kBoundViolated;
  }
  return kHarness;
}

struct PlanArgs {
  std::string scenario;
  std::string method = "bnb";
  std::string bound = "mst";
  bool verify = false;
  std::string out;
};

struct SimArgs {
  std::string scenario;
  std::string plan;
  std::string method = "bnb";
  std::string bound = "mst";
  std::uint64_t seed = 0;
  double noise_mae = NoiseModel{}.mae_v;
  std::string out;
};

struct BenchArgs {
  std::vector<std::string> scenarios;
  std::vector<std::string> methods = {"greedy", "bnb"};
  std::string bound = "mst";
  bool verify = false;
  std::uint64_t seed = 0;
  int seeds = 20;
  double noise_mae = NoiseModel{}.mae_v;
  std::string out;
};

BnbOptions bnb_options(const std::string& bound, bool verify) {
  BnbOptions opts;
  opts.bound = parse_bound_mode(bound);
  opts.verify_bounds = verify;
  return opts;
}

int cmd_plan(const PlanArgs& a) {
  const Scenario sc = load_scenario(a.scenario);
  const PlanMethod method = parse_plan_method(a.method);
  const BnbOptions opts = bnb_options(a.bound, a.verify);
  const PlanOutcome outcome = plan_scenario(sc, method, opts);
  if (!a.out.empty()) {
    write_plan(a.out, sc, outcome.plan,
               {std::string(to_string(method)),
                method == PlanMethod::kBnb ? std::string(to_string(opts.bound)) : "",
                outcome.expansions});
  }
  std::printf("method=%s cost_s=%.6f expansions=%zu\n", std::string(to_string(method)).c_str(),
              outcome.plan.total_cost, outcome.expansions);
  return kOk;
}

void write_run(const std::string& dir, const std::string& scenario, const std::string& method,
               std::uint64_t seed, const EpisodeResult& result) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot create " + dir + ": " + ec.message());
  const MetricsRow row = metrics_row(scenario, method, seed, result);
  write_text_file((fs::path(dir) / "metrics.csv").string(),
                  std::string(metrics_header()) + "\n" + format_metrics_row(row) + "\n");
  write_trajectory_file((fs::path(dir) / "executed.traj").string(), result.executed);
}

int cmd_simulate(const SimArgs& a) {
  const Scenario sc = load_scenario(a.scenario);
  if (a.noise_mae < 0.0) throw Error(ErrorCode::kInvalidArgument, "--noise-mae must be >= 0");
  TaskPlan plan;
  std::string method = a.method;
  if (!a.plan.empty()) {
    PlanSummary summary;
    plan = read_plan(a.plan, sc, &summary);
    method = summary.method.empty() ? "file" : summary.method;
  } else {
    plan = plan_scenario(sc, parse_plan_method(a.method), bnb_options(a.bound, false)).plan;
  }
  const NoiseModel noise = noise_for_run(a.noise_mae, sc.seed, a.seed);
  EpisodeResult result;
  int code = kOk;
  try {
    result = run_episode(sc, plan, TrackerConfig{}, noise);
  } catch (const CollisionAbort& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    result = e.partial();
    code = kCollision;
  }
  const MetricsRow row = metrics_row(sc.name, method, a.seed, result);
  if (!a.out.empty()) write_run(a.out, sc.name, method, a.seed, result);
  std::printf("%s\n%s\n", std::string(metrics_header()).c_str(), format_metrics_row(row).c_str());
  return code;
}

int cmd_benchmark(const BenchArgs& a) {
  if (a.seeds < 1) throw Error(ErrorCode::kInvalidArgument, "--seeds must be >= 1");
  if (a.noise_mae < 0.0) throw Error(ErrorCode::kInvalidArgument, "--noise-mae must be >= 0");
  std::vector<Scenario> scenarios;
  for (const std::string& pattern : a.scenarios) {
    for (const std::string& path : expand_glob(pattern)) scenarios.push_back(load_scenario(path));
  }
  BenchmarkOptions opts;
  opts.methods.clear();
  for (const std::string& m : a.methods) opts.methods.push_back(parse_plan_method(m));
  for (int k = 0; k < a.seeds; ++k) opts.seeds.push_back(a.seed + static_cast<std::uint64_t>(k));
  opts.noise_mae = a.noise_mae;
  opts.bnb = bnb_options(a.bound, a.verify);
  const BenchmarkReport report = run_benchmark(scenarios, opts);
  const std::string csv = report.to_csv();
  if (a.out.empty()) {
    std::fputs(csv.c_str(), stdout);
  } else {
    write_text_file(a.out, csv);
    for (const BenchmarkAggregate& g : report.aggregates) {
      std::printf("%s %s time_s=%.3f+-%.3f distance_m=%.3f success=%.3f\n", g.scenario.c_str(),
                  g.method.c_str(), g.mean_completion_time, g.sd_completion_time,
                  g.mean_total_distance, g.success_rate);
    }
  }
  for (const std::string& v : report.violations) {
    std::fprintf(stderr, "warning: mean bnb time exceeds greedy on %s\n", v.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Object rearrangement planning and simulation"};
  app.require_subcommand(1);

  PlanArgs plan;
  CLI::App* p = app.add_subcommand("plan", "Plan a scenario and dump the plan");
  p->add_option("--scenario", plan.scenario, "Scenario file")->required();
  p->add_option("--method", plan.method, "greedy | bnb")->capture_default_str();
  p->add_option("--bound", plan.bound, "assignment | rowmin | mst")->capture_default_str();
  p->add_flag("--verify-bounds", plan.verify, "Cross-check bounds by brute force (N <= 5)");
  p->add_option("--out", plan.out, "Plan directory");

  SimArgs sim;
  CLI::App* s = app.add_subcommand("simulate", "Execute a plan under actuation noise");
  s->add_option("--scenario", sim.scenario, "Scenario file")->required();
  s->add_option("--plan", sim.plan, "Plan directory from `plan`; planned on the fly if absent");
  s->add_option("--method", sim.method, "greedy | bnb when planning on the fly")
      ->capture_default_str();
  s->add_option("--bound", sim.bound, "assignment | rowmin | mst")->capture_default_str();
  s->add_option("--seed", sim.seed, "Run seed")->capture_default_str();
  s->add_option("--noise-mae", sim.noise_mae, "Linear velocity noise MAE, m/s")
      ->capture_default_str();
  s->add_option("--out", sim.out, "Output directory for metrics.csv and executed.traj");

  BenchArgs bench;
  CLI::App* b = app.add_subcommand("benchmark", "Run every scenario x method x seed");
  b->add_option("--scenario", bench.scenarios, "Scenario file or glob (repeatable)")->required();
  b->add_option("--method", bench.methods, "Methods (repeatable)")->capture_default_str();
  b->add_option("--bound", bench.bound, "assignment | rowmin | mst")->capture_default_str();
  b->add_flag("--verify-bounds", bench.verify, "Cross-check bounds by brute force (N <= 5)");
  b->add_option("--seed", bench.seed, "First run seed")->capture_default_str();
  b->add_option("--seeds", bench.seeds, "Number of consecutive seeds")->capture_default_str();
  b->add_option("--noise-mae", bench.noise_mae, "Linear velocity noise MAE, m/s")
      ->capture_default_str();
  b->add_option("--out", bench.out, "Report CSV path (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInput;
  }

  try {
    if (*p) return cmd_plan(plan);
    if (*s) return cmd_simulate(sim);
    if (*b) return cmd_benchmark(bench);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kHarness;
  }
  return kHarness;
}
