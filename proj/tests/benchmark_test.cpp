#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "rearrange/benchmark.hpp"
#include "rearrange/error.hpp"
#include "rearrange/io.hpp"

using namespace rearrange;

namespace {

Scenario pair_scenario() {
  Scenario sc;
  sc.name = "pair";
  sc.seed = 9;
  sc.world_bounds = {-6, -6, 6, 6};
  sc.robot_start = {-4, 0, 0};
  sc.objects.push_back({"a", ObjectCategory::kBin, {0, 2, 0}});
  sc.objects.push_back({"b", ObjectCategory::kChair, {0, -2, 0}});
  sc.targets = {{3, 3, 0}, {3, -3, 0}};
  return sc;
}

Scenario single_scenario() {
  Scenario sc = pair_scenario();
  sc.name = "single";
  sc.objects.resize(1);
  sc.targets.resize(1);
  return sc;
}

}  // namespace

TEST(PlanMethodNames, RoundTrip) {
  EXPECT_EQ(parse_plan_method("greedy"), PlanMethod::kGreedy);
  EXPECT_EQ(parse_plan_method("bnb"), PlanMethod::kBnb);
  EXPECT_EQ(to_string(PlanMethod::kBnb), "bnb");
  EXPECT_THROW(parse_plan_method("astar"), Error);
}

TEST(PlanScenario, SingleObjectGreedyEqualsBnb) {
  const Scenario sc = single_scenario();
  const PlanOutcome g = plan_scenario(sc, PlanMethod::kGreedy);
  const PlanOutcome b = plan_scenario(sc, PlanMethod::kBnb);
  EXPECT_EQ(g.plan.order, b.plan.order);
  EXPECT_EQ(g.plan.assignment, b.plan.assignment);
  EXPECT_DOUBLE_EQ(g.plan.total_cost, b.plan.total_cost);
}

TEST(PlanScenario, BnbNeverWorseThanGreedy) {
  const Scenario sc = pair_scenario();
  const TrajectoryPlanner planner(sc.limits);
  const CostMatrices costs = build_cost_matrices(sc, planner);
  EXPECT_LE(plan_with(costs, PlanMethod::kBnb).plan.total_cost,
            plan_with(costs, PlanMethod::kGreedy).plan.total_cost);
}

TEST(CostMatrices, EntriesEqualDirectPlannerCalls) {
  const Scenario sc = pair_scenario();
  const TrajectoryPlanner planner(sc.limits);
  const CostMatrices costs = build_cost_matrices(sc, planner);
  const OccupancyMap pre = update_map(initial_map(sc), std::nullopt, MapPhase::kPreGrasp);
  for (std::size_t j = 0; j < sc.size(); ++j) {
    EXPECT_DOUBLE_EQ(costs.travel[0][j],
                     planner.plan(sc.robot_start, pre_grasp_pose(sc, j), robot_model(sc), pre)
                         .duration());
    const OccupancyMap post =
        update_map(initial_map(sc), sc.objects[j].id, MapPhase::kPostGrasp);
    for (std::size_t l = 0; l < sc.size(); ++l) {
      EXPECT_DOUBLE_EQ(costs.manipulate[j][l],
                       planner
                           .plan(pre_grasp_pose(sc, j), release_pose(sc, j, l),
                                 held_model(sc, j), post)
                           .duration());
    }
  }
}

TEST(NoiseForRun, KeepsAngularRatioAndMixesSeeds) {
  const NoiseModel base;
  const NoiseModel n = noise_for_run(0.1, 3, 4);
  EXPECT_DOUBLE_EQ(n.mae_v, 0.1);
  EXPECT_NEAR(n.mae_omega / n.mae_v, base.mae_omega / base.mae_v, 1e-12);
  EXPECT_NE(noise_for_run(0.1, 3, 4).seed, noise_for_run(0.1, 4, 3).seed);
  EXPECT_EQ(noise_for_run(0.0, 3, 4).mae_omega, 0.0);
}

TEST(Benchmark, RowCountIsCrossProduct) {
  BenchmarkOptions opts;
  opts.seeds = {0, 1, 2};
  const BenchmarkReport rep = run_benchmark({pair_scenario(), single_scenario()}, opts);
  EXPECT_EQ(rep.rows.size(), 2u * 2u * 3u);
  EXPECT_EQ(rep.aggregates.size(), 4u);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i - 1];
    const auto& b = rep.rows[i];
    EXPECT_TRUE(std::tie(a.scenario, a.method, a.seed) < std::tie(b.scenario, b.method, b.seed));
  }
  for (const auto& r : rep.rows) EXPECT_EQ(r.status, "ok") << r.scenario << " " << r.seed;
  ASSERT_NE(rep.find("pair", "bnb"), nullptr);
  EXPECT_EQ(rep.find("pair", "bnb")->runs, 3);
  EXPECT_EQ(rep.find("pair", "dijkstra"), nullptr);
}

TEST(Benchmark, RerunIsByteIdentical) {
  BenchmarkOptions opts;
  opts.seeds = {7, 8};
  const std::string first = run_benchmark({pair_scenario()}, opts).to_csv();
  const std::string second = run_benchmark({pair_scenario()}, opts).to_csv();
  EXPECT_EQ(first, second);
  EXPECT_FALSE(first.empty());
}

TEST(Benchmark, DifferentSeedsChangeTheRun) {
  BenchmarkOptions opts;
  opts.seeds = {1, 2};
  opts.methods = {PlanMethod::kGreedy};
  const BenchmarkReport rep = run_benchmark({pair_scenario()}, opts);
  EXPECT_NE(rep.rows[0].mean_error, rep.rows[1].mean_error);
}

TEST(Benchmark, NoiselessRunsSucceedEverywhere) {
  BenchmarkOptions opts;
  opts.seeds = {0, 1};
  opts.noise_mae = 0.0;
  const BenchmarkReport rep = run_benchmark({pair_scenario()}, opts);
  for (const auto& r : rep.rows) EXPECT_EQ(r.successes, r.objects);
  EXPECT_DOUBLE_EQ(rep.rows[0].completion_time, rep.rows[1].completion_time);
}

TEST(Benchmark, InfeasibleScenarioIsRecordedPerRow) {
  Scenario sc = single_scenario();
  for (int k = 0; k < 16; ++k) {
    const double a = k * 2 * M_PI / 16;
    sc.static_obstacles.push_back({{3 + 1.6 * std::cos(a), 3 + 1.6 * std::sin(a)}, 0.4});
  }
  BenchmarkOptions opts;
  opts.seeds = {0};
  const BenchmarkReport rep = run_benchmark({sc}, opts);
  ASSERT_EQ(rep.rows.size(), 2u);
  for (const auto& r : rep.rows) EXPECT_EQ(r.status, "infeasible");
}

TEST(Benchmark, CsvHasRowsAggregatesAndOrderingSection) {
  BenchmarkOptions opts;
  opts.seeds = {0};
  const std::string csv = run_benchmark({pair_scenario()}, opts).to_csv();
  EXPECT_NE(csv.find("pair,bnb,0,"), std::string::npos);
  EXPECT_NE(csv.find("pair,greedy,0,"), std::string::npos);
  EXPECT_NE(csv.find("scenario,bnb_time_le_greedy"), std::string::npos);
}

TEST(ExpandGlob, SortedMatchesAndNoMatchIsIoError) {
  const auto files = expand_glob(std::string(REARRANGE_SCENARIO_DIR) + "/*.json");
  ASSERT_GE(files.size(), 4u);
  EXPECT_TRUE(std::is_sorted(files.begin(), files.end()));
  try {
    expand_glob("/nonexistent/*.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
}
