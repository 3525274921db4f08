#include "rearrange/task_planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>

#include "rearrange/error.hpp"

namespace rearrange {
namespace {

using Mask = std::uint32_t;

std::vector<int> members(Mask mask, int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (mask & (Mask{1} << i)) out.push_back(i);
  }
  return out;
}

std::optional<Assignment> solve_assignment(const CostMatrix& a) {
  const int n = static_cast<int>(a.size());
  Assignment result;
  if (n == 0) return result;
  // Infinite entries become one large finite value that no all-finite
  // matching can reach.
  double finite_sum = 1.0;
  for (const auto& row : a) {
    if (static_cast<int>(row.size()) != n) {
      throw Error(ErrorCode::kDimensionMismatch, "assignment matrix must be square");
    }
    for (double x : row) {
      if (std::isnan(x) || x < 0.0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "assignment costs must be >= 0 or +inf");
      }
      if (std::isfinite(x)) finite_sum += x;
    }
  }
  const double big = finite_sum * (n + 1);
  auto at = [&](int i, int j) {
    const double x = a[i - 1][j - 1];
    return std::isfinite(x) ? x : big;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  result.column_of_row.assign(n, -1);
  for (int j = 1; j <= n; ++j) result.column_of_row[p[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) {
    const double x = a[i][result.column_of_row[i]];
    if (!std::isfinite(x)) return std::nullopt;
    result.cost += x;
  }
  return result;
}

class BoundEvaluator {
 public:
  BoundEvaluator(const CostMatrices& costs, BoundMode mode)
      : costs_(costs), mode_(mode), n_(static_cast<int>(costs.size())) {}

  double operator()(double g, int current_row, Mask objects, Mask targets) const {
    if (objects == 0) return g;
    const std::vector<int> objs = members(objects, n_);
    const std::vector<int> tgts = members(targets, n_);
    CostMatrix sub(objs.size(), std::vector<double>(tgts.size()));
    for (std::size_t r = 0; r < objs.size(); ++r) {
      for (std::size_t c = 0; c < tgts.size(); ++c) {
        sub[r][c] = costs_.manipulate[objs[r]][tgts[c]];
      }
    }
    const std::optional<Assignment> manip = solve_assignment(sub);
    if (!manip) return kInfeasibleCost;
    double travel = 0.0;
    switch (mode_) {
      case BoundMode::kAssignment:
        break;
      case BoundMode::kAssignmentRowMin:
        for (int j : objs) {
          double best = costs_.travel[current_row][j];
          for (int l : tgts) best = std::min(best, costs_.travel[l + 1][j]);
          travel += best;
        }
        break;
      case BoundMode::kAssignmentMst:
        travel = mst_travel_bound(current_row, objs, tgts, costs_);
        break;
    }
    return g + (manip->cost + travel);
  }

 private:
  const CostMatrices& costs_;
  BoundMode mode_;
  int n_;
};

// Cheapest completion from a partial sequence by exhaustive enumeration,
// accumulated exactly like sequence_cost.
double brute_force_completion(const CostMatrices& costs, double g,
                              int current_row, Mask objects, Mask targets,
                              int n) {
  if (objects == 0) return g;
  double best = kInfeasibleCost;
  for (int j = 0; j < n; ++j) {
    if (!(objects & (Mask{1} << j))) continue;
    for (int l = 0; l < n; ++l) {
      if (!(targets & (Mask{1} << l))) continue;
      double next = g + costs.travel[current_row][j];
      next += costs.manipulate[j][l];
      if (!(next < best)) continue;
      best = std::min(best, brute_force_completion(
                                costs, next, l + 1, objects & ~(Mask{1} << j),
                                targets & ~(Mask{1} << l), n));
    }
  }
  return best;
}

struct BnbNode {
  double lower_bound = 0.0;
  double g = 0.0;
  int current_row = 0;
  Mask objects = 0;
  Mask targets = 0;
  std::vector<int> order;
  std::vector<int> assignment;
  std::size_t sequence = 0;
};

struct WorseNode {
  bool operator()(const BnbNode& a, const BnbNode& b) const {
    if (a.lower_bound != b.lower_bound) return a.lower_bound > b.lower_bound;
    if (a.order.size() != b.order.size()) return a.order.size() < b.order.size();
    return a.sequence > b.sequence;
  }
};

}  // namespace

CostMatrices CostMatrices::from_values(CostMatrix travel, CostMatrix manipulate) {
  const std::size_t n = manipulate.size();
  if (n == 0 || travel.size() != n + 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "travel must be (N+1) x N and manipulate N x N with N >= 1");
  }
  for (const auto* m : {&travel, &manipulate}) {
    for (const auto& row : *m) {
      if (row.size() != n) {
        throw Error(ErrorCode::kDimensionMismatch, "cost matrix row has wrong width");
      }
      for (double x : row) {
        if (std::isnan(x) || x < 0.0) {
          throw Error(ErrorCode::kInvalidArgument, "costs must be >= 0 or +inf");
        }
      }
    }
  }
  CostMatrices out;
  out.travel = std::move(travel);
  out.manipulate = std::move(manipulate);
  return out;
}

CostMatrices build_cost_matrices(const Scenario& scenario,
                                 const TrajectoryPlanner& planner) {
  validate(scenario);
  const std::size_t n = scenario.size();
  const OccupancyMap base = initial_map(scenario);
  const OccupancyMap pre_map = update_map(base, std::nullopt, MapPhase::kPreGrasp);
  const CollisionModel robot = robot_model(scenario);

  auto attempt = [&](const Pose2& from, const Pose2& to,
                     const CollisionModel& model,
                     const OccupancyMap& map) -> std::optional<Trajectory> {
    try {
      return planner.plan(from, to, model, map);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNoPathFound ||
          e.code() == ErrorCode::kGoalInCollision ||
          e.code() == ErrorCode::kStartInCollision) {
        return std::nullopt;
      }
      throw;
    }
  };

  CostMatrices out;
  out.travel.assign(n + 1, std::vector<double>(n, kInfeasibleCost));
  out.manipulate.assign(n, std::vector<double>(n, kInfeasibleCost));
  out.travel_paths.assign(n + 1, std::vector<std::optional<Trajectory>>(n));
  out.manipulate_paths.assign(n, std::vector<std::optional<Trajectory>>(n));

  for (std::size_t p = 0; p <= n; ++p) {
    // Offsets are shared, so the release pose at a target is the same for
    // every object.
    const Pose2 from = p == 0 ? scenario.robot_start : release_pose(scenario, 0, p - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (auto traj = attempt(from, pre_grasp_pose(scenario, j), robot, pre_map)) {
        out.travel[p][j] = traj->duration();
        out.travel_paths[p][j] = std::move(traj);
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    const OccupancyMap post_map =
        update_map(base, scenario.objects[j].id, MapPhase::kPostGrasp);
    const CollisionModel held = held_model(scenario, j);
    for (std::size_t l = 0; l < n; ++l) {
      if (auto traj = attempt(pre_grasp_pose(scenario, j),
                              release_pose(scenario, j, l), held, post_map)) {
        out.manipulate[j][l] = traj->duration();
        out.manipulate_paths[j][l] = std::move(traj);
      }
    }
  }

  auto all_inf = [](auto&& values) {
    return std::all_of(values.begin(), values.end(),
                       [](double x) { return !std::isfinite(x); });
  };
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> travel_col, manip_col;
    for (std::size_t p = 0; p <= n; ++p) travel_col.push_back(out.travel[p][j]);
    for (std::size_t i = 0; i < n; ++i) manip_col.push_back(out.manipulate[i][j]);
    const std::string& id = scenario.objects[j].id;
    if (all_inf(travel_col)) {
      throw Error(ErrorCode::kPlanningInfeasible, "object '" + id + "' cannot be reached");
    }
    if (all_inf(out.manipulate[j])) {
      throw Error(ErrorCode::kPlanningInfeasible,
                  "object '" + id + "' cannot be moved to any target");
    }
    if (all_inf(manip_col)) {
      throw Error(ErrorCode::kPlanningInfeasible,
                  "targets[" + std::to_string(j) + "] cannot be reached by any object");
    }
  }
  if (all_inf(out.travel[0])) {
    throw Error(ErrorCode::kPlanningInfeasible, "robot cannot reach any object");
  }
  return out;
}

std::vector<int> TaskPlan::target_of() const {
  std::vector<int> out(order.size(), -1);
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = assignment[k];
  return out;
}

double sequence_cost(const CostMatrices& costs, const std::vector<int>& order,
                     const std::vector<int>& assignment) {
  double total = 0.0;
  int row = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    total += costs.travel[row][order[k]];
    total += costs.manipulate[order[k]][assignment[k]];
    row = assignment[k] + 1;
  }
  return total;
}

double plan_cost(const TaskPlan& plan) {
  double total = 0.0;
  for (const TaskPlan::Task& task : plan.tasks) {
    total += task.pre.duration();
    total += task.post.duration();
  }
  return total;
}

void attach_trajectories(TaskPlan& plan, const CostMatrices& costs) {
  if (costs.travel_paths.empty()) {
    plan.tasks.clear();
    plan.total_cost = sequence_cost(costs, plan.order, plan.assignment);
    return;
  }
  plan.tasks.clear();
  int row = 0;
  for (std::size_t k = 0; k < plan.order.size(); ++k) {
    const auto& pre = costs.travel_paths[row][plan.order[k]];
    const auto& post = costs.manipulate_paths[plan.order[k]][plan.assignment[k]];
    if (!pre || !post) {
      throw Error(ErrorCode::kPlanningInfeasible,
                  "plan uses an entry without a trajectory");
    }
    plan.tasks.push_back({*pre, *post});
    row = plan.assignment[k] + 1;
  }
  plan.total_cost = plan_cost(plan);
}

TaskPlan greedy_plan(const CostMatrices& costs) {
  const int n = static_cast<int>(costs.size());
  TaskPlan plan;
  std::vector<bool> object_done(n, false), target_done(n, false);
  int row = 0;
  for (int k = 0; k < n; ++k) {
    int object = -1;
    for (int j = 0; j < n; ++j) {
      if (object_done[j]) continue;
      if (object < 0 || costs.travel[row][j] < costs.travel[row][object]) object = j;
    }
    int target = -1;
    for (int l = 0; l < n; ++l) {
      if (target_done[l]) continue;
      if (target < 0 || costs.manipulate[object][l] < costs.manipulate[object][target]) {
        target = l;
      }
    }
    if (!std::isfinite(costs.travel[row][object]) ||
        !std::isfinite(costs.manipulate[object][target])) {
      throw Error(ErrorCode::kPlanningInfeasible,
                  "greedy plan reached an infeasible step at task " + std::to_string(k));
    }
    object_done[object] = true;
    target_done[target] = true;
    plan.order.push_back(object);
    plan.assignment.push_back(target);
    row = target + 1;
  }
  attach_trajectories(plan, costs);
  return plan;
}

Assignment hungarian_assign(const CostMatrix& cost) {
  std::optional<Assignment> result = solve_assignment(cost);
  if (!result) {
    throw Error(ErrorCode::kInfeasibleAssignment, "every assignment has infinite cost");
  }
  return *result;
}

double prim_mst_weight(const CostMatrix& w) {
  const std::size_t n = w.size();
  if (n <= 1) return 0.0;
  std::vector<bool> in_tree(n, false);
  std::vector<double> best(n, kInfeasibleCost);
  best[0] = 0.0;
  double total = 0.0;
  for (std::size_t it = 0; it < n; ++it) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v] && (pick == n || best[v] < best[pick])) pick = v;
    }
    if (!std::isfinite(best[pick])) return kInfeasibleCost;
    in_tree[pick] = true;
    total += best[pick];
    for (std::size_t v = 0; v < n; ++v) {
      if (!in_tree[v]) best[v] = std::min(best[v], w[pick][v]);
    }
  }
  return total;
}

double mst_travel_bound(int current_row, const std::vector<int>& remaining_objects,
                        const std::vector<int>& remaining_targets,
                        const CostMatrices& costs) {
  const std::size_t m = remaining_objects.size();
  if (m == 0) return 0.0;
  std::vector<double> inbound(m, kInfeasibleCost);
  for (std::size_t a = 0; a < m; ++a) {
    for (int l : remaining_targets) {
      inbound[a] = std::min(inbound[a], costs.travel[l + 1][remaining_objects[a]]);
    }
  }
  // Node 0 is the current location.
  CostMatrix w(m + 1, std::vector<double>(m + 1, 0.0));
  for (std::size_t a = 0; a < m; ++a) {
    w[0][a + 1] = w[a + 1][0] = costs.travel[current_row][remaining_objects[a]];
    for (std::size_t b = a + 1; b < m; ++b) {
      w[a + 1][b + 1] = w[b + 1][a + 1] = std::min(inbound[a], inbound[b]);
    }
  }
  return prim_mst_weight(w);
}

std::string_view to_string(BoundMode mode) {
  switch (mode) {
    case BoundMode::kAssignment: return "assignment";
    case BoundMode::kAssignmentRowMin: return "rowmin";
    case BoundMode::kAssignmentMst: return "mst";
  }
  return "mst";
}

BoundMode parse_bound_mode(std::string_view name) {
  if (name == "assignment") return BoundMode::kAssignment;
  if (name == "rowmin") return BoundMode::kAssignmentRowMin;
  if (name == "mst") return BoundMode::kAssignmentMst;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown bound mode '" + std::string(name) + "'");
}

BnbResult branch_and_bound(const CostMatrices& costs,
                           const std::optional<TaskPlan>& warm_start,
                           const BnbOptions& options) {
  const int n = static_cast<int>(costs.size());
  if (n == 0 || n > 16) {
    throw Error(ErrorCode::kInvalidArgument, "branch and bound supports 1..16 objects");
  }
  if (options.verify_bounds && n > 5) {
    throw Error(ErrorCode::kInvalidArgument, "bound verification needs N <= 5");
  }
  const BoundEvaluator bound(costs, options.bound);
  const Mask all = (Mask{1} << n) - 1;

  BnbResult result;
  double incumbent = kInfeasibleCost;
  std::vector<int> best_order, best_assignment;
  if (warm_start) {
    incumbent = sequence_cost(costs, warm_start->order, warm_start->assignment);
    best_order = warm_start->order;
    best_assignment = warm_start->assignment;
  }

  auto tolerance = [](double x) { return 1e-9 * std::max(1.0, std::abs(x)); };
  auto verify_admissible = [&](const BnbNode& node) {
    const double exact = brute_force_completion(costs, node.g, node.current_row,
                                                node.objects, node.targets, n);
    ++result.verified_nodes;
    if (std::isfinite(exact) && node.lower_bound > exact + tolerance(exact)) {
      throw Error(ErrorCode::kBoundViolation,
                  "lower bound " + std::to_string(node.lower_bound) +
                      " exceeds best completion " + std::to_string(exact));
    }
    return exact;
  };
  auto verify_pruned = [&](const BnbNode& node) {
    const double exact = verify_admissible(node);
    if (exact < incumbent - tolerance(incumbent)) {
      throw Error(ErrorCode::kBoundViolation,
                  "pruned branch holds a cheaper solution " + std::to_string(exact));
    }
  };

  std::priority_queue<BnbNode, std::vector<BnbNode>, WorseNode> open;
  std::size_t sequence = 0;
  BnbNode root;
  root.objects = all;
  root.targets = all;
  root.lower_bound = bound(0.0, 0, all, all);
  root.sequence = sequence++;
  if (options.verify_bounds) verify_admissible(root);
  open.push(std::move(root));

  while (!open.empty()) {
    BnbNode node = open.top();
    open.pop();
    if (node.lower_bound >= incumbent) {
      // Best-first: everything left is at least as bad.
      result.pruned += open.size() + 1;
      if (options.verify_bounds) {
        verify_pruned(node);
        while (!open.empty()) {
          verify_pruned(open.top());
          open.pop();
        }
      }
      break;
    }
    ++result.expansions;
    for (int j = 0; j < n; ++j) {
      if (!(node.objects & (Mask{1} << j))) continue;
      const double travel = costs.travel[node.current_row][j];
      if (!std::isfinite(travel)) continue;
      for (int l = 0; l < n; ++l) {
        if (!(node.targets & (Mask{1} << l))) continue;
        const double manip = costs.manipulate[j][l];
        if (!std::isfinite(manip)) continue;
        BnbNode child;
        child.g = node.g + travel;
        child.g += manip;
        child.current_row = l + 1;
        child.objects = node.objects & ~(Mask{1} << j);
        child.targets = node.targets & ~(Mask{1} << l);
        child.order = node.order;
        child.order.push_back(j);
        child.assignment = node.assignment;
        child.assignment.push_back(l);
        if (child.objects == 0) {
          if (child.g < incumbent) {
            incumbent = child.g;
            best_order = child.order;
            best_assignment = child.assignment;
          }
          continue;
        }
        child.lower_bound =
            bound(child.g, child.current_row, child.objects, child.targets);
        child.sequence = sequence++;
        if (child.lower_bound >= incumbent) {
          ++result.pruned;
          if (options.verify_bounds) verify_pruned(child);
          continue;
        }
        if (options.verify_bounds) verify_admissible(child);
        open.push(std::move(child));
      }
    }
  }

  if (!std::isfinite(incumbent)) {
    throw Error(ErrorCode::kPlanningInfeasible, "no feasible task sequence exists");
  }
  result.plan.order = std::move(best_order);
  result.plan.assignment = std::move(best_assignment);
  attach_trajectories(result.plan, costs);
  return result;
}

}  // namespace rearrange
