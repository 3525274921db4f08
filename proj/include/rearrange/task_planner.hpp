#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "rearrange/planner.hpp"
#include "rearrange/scenario.hpp"
#include "rearrange/trajectory.hpp"

namespace rearrange {

inline constexpr double kInfeasibleCost = std::numeric_limits<double>::infinity();

using CostMatrix = std::vector<std::vector<double>>;

/// Memoized trajectory durations behind the task-sequencing objective.
///
/// travel[p][j]: robot-only time from departure p to the pre-grasp pose of
/// object j, where row 0 is the robot start and row l+1 is the release pose
/// at target l. manipulate[j][l]: robot-with-object time from object j's
/// grasp pose to target l. Unreachable entries hold kInfeasibleCost.
struct CostMatrices {
  CostMatrix travel;
  CostMatrix manipulate;
  // Trajectories behind the finite entries; empty when the matrices were
  // given directly.
  std::vector<std::vector<std::optional<Trajectory>>> travel_paths;
  std::vector<std::vector<std::optional<Trajectory>>> manipulate_paths;

  std::size_t size() const { return manipulate.size(); }

  /// Checks shapes ((N+1) x N and N x N) and non-negativity.
  static CostMatrices from_values(CostMatrix travel, CostMatrix manipulate);
};

/// Plans every entry with the map rule applied to the initial
/// configuration: travel with all objects as obstacles, manipulation with
/// the moved object freed. Throws PLANNING_INFEASIBLE when some object or
/// target can never be served.
CostMatrices build_cost_matrices(const Scenario& scenario,
                                 const TrajectoryPlanner& planner);

/// Visit order plus per-task target. order[k] is the k-th object visited
/// and assignment[k] the target it is released at.
struct TaskPlan {
  std::vector<int> order;
  std::vector<int> assignment;
  struct Task {
    Trajectory pre;
    Trajectory post;
  };
  std::vector<Task> tasks;  // empty for matrix-only plans
  double total_cost = 0.0;

  /// target_of[object] for the object-to-target bijection.
  std::vector<int> target_of() const;
};

/// Objective evaluated on the matrices, accumulated task by task as
/// (travel, then manipulation).
double sequence_cost(const CostMatrices& costs, const std::vector<int>& order,
                     const std::vector<int>& assignment);

/// Sum of the stored trajectory durations.
double plan_cost(const TaskPlan& plan);

/// Fills plan.tasks from the memoized trajectories and sets total_cost to
/// their summed duration.
void attach_trajectories(TaskPlan& plan, const CostMatrices& costs);

/// Nearest-next-object baseline: cheapest travel from the current location,
/// then cheapest unassigned target for that object. Ties go to the lowest
/// index. Throws PLANNING_INFEASIBLE.
TaskPlan greedy_plan(const CostMatrices& costs);

struct Assignment {
  std::vector<int> column_of_row;
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square matrix with entries >= 0 or
/// +inf. Throws INFEASIBLE_ASSIGNMENT when every matching is infinite.
Assignment hungarian_assign(const CostMatrix& cost);

/// Prim's minimum spanning tree weight on a symmetric weight matrix
/// (+inf = no edge). Returns +inf for a disconnected graph and 0 for a
/// single node.
double prim_mst_weight(const CostMatrix& weights);

/// Lower bound on the remaining travel time. Nodes are the current location
/// and the remaining objects' pre-grasp poses. The edge (current, j) costs
/// travel[current][j]; the edge (i, j) costs min(m_i, m_j), where m_j is the
/// cheapest travel into j from the release pose of any remaining target.
/// Every feasible completion traces a Hamiltonian path in this graph that
/// costs no less, so the MST weight is admissible.
double mst_travel_bound(int current_row, const std::vector<int>& remaining_objects,
                        const std::vector<int>& remaining_targets,
                        const CostMatrices& costs);

enum class BoundMode { kAssignment, kAssignmentRowMin, kAssignmentMst };

std::string_view to_string(BoundMode mode);
BoundMode parse_bound_mode(std::string_view name);

struct BnbOptions {
  BoundMode bound = BoundMode::kAssignmentMst;
  /// Cross-checks every bound against brute force (N <= 5 only) and throws
  /// BOUND_VIOLATION on an inadmissible bound or a pruned better solution.
  bool verify_bounds = false;
};

struct BnbResult {
  TaskPlan plan;
  std::size_t expansions = 0;
  std::size_t pruned = 0;
  std::size_t verified_nodes = 0;
};

/// Best-first branch and bound over (object, target) task sequences. The
/// incumbent starts from `warm_start` (typically greedy_plan); a node is
/// pruned iff its lower bound reaches the incumbent. Returns the global
/// minimum of sequence_cost over all orders and assignments.
BnbResult branch_and_bound(const CostMatrices& costs,
                           const std::optional<TaskPlan>& warm_start,
                           const BnbOptions& options = {});

}  // namespace rearrange
