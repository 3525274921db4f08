#include "rearrange/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <tuple>

#include "rearrange/error.hpp"

namespace rearrange {
namespace {

constexpr double kPi = std::numbers::pi;

// Trapezoidal time law over a run of length `total` (meters or radians),
// starting and ending at rest.
class TrapezoidProfile {
 public:
  TrapezoidProfile(double total, double cap, double accel) : total_(total) {
    if (accel <= 0.0 || !std::isfinite(accel)) {
      peak_ = cap;
      ramp_ = 0.0;
      accel_ = std::numeric_limits<double>::infinity();
    } else {
      accel_ = accel;
      peak_ = std::min(cap, std::sqrt(accel * total));
      ramp_ = peak_ * peak_ / (2.0 * accel);
    }
    ramp_time_ = std::isinf(accel_) ? 0.0 : peak_ / accel_;
    cruise_time_ = (total_ - 2.0 * ramp_) / peak_;
  }

  double duration() const { return 2.0 * ramp_time_ + cruise_time_; }

  double time_at(double s) const {
    s = std::clamp(s, 0.0, total_);
    if (s < ramp_) return std::sqrt(2.0 * s / accel_);
    if (s <= total_ - ramp_) return ramp_time_ + (s - ramp_) / peak_;
    return duration() - std::sqrt(2.0 * std::max(0.0, total_ - s) / accel_);
  }

 private:
  double total_;
  double peak_ = 0.0;
  double ramp_ = 0.0;
  double accel_ = 0.0;
  double ramp_time_ = 0.0;
  double cruise_time_ = 0.0;
};

int motion_class(const PathSegment& seg) {
  if (seg.kind == PathSegment::Kind::kRotate) return seg.angle > 0 ? 2 : -2;
  return seg.length > 0 ? 1 : -1;
}

double segment_extent(const PathSegment& seg) {
  return seg.kind == PathSegment::Kind::kRotate ? std::abs(seg.angle)
                                                : std::abs(seg.length);
}

// Heading change of a segment.
double segment_turn(const PathSegment& seg) {
  return seg.kind == PathSegment::Kind::kRotate ? seg.angle
                                                : seg.curvature * seg.length;
}

double segment_distance(const PathSegment& seg) {
  return seg.kind == PathSegment::Kind::kRotate ? 0.0 : seg.length;
}

std::vector<PathSegment> merge_segments(const std::vector<PathSegment>& in) {
  std::vector<PathSegment> out;
  for (const PathSegment& seg : in) {
    if (segment_extent(seg) <= 0.0) continue;
    if (!out.empty()) {
      PathSegment& last = out.back();
      if (last.kind == seg.kind && motion_class(last) == motion_class(seg) &&
          last.curvature == seg.curvature) {
        last.length += seg.length;
        last.angle += seg.angle;
        continue;
      }
    }
    out.push_back(seg);
  }
  return out;
}

// Footprint circles at every check point of a motion, expressed in the
// frame of the motion's start pose. Check points are spaced so that no
// footprint point moves more than `spacing` between consecutive ones.
class Sweep {
 public:
  Sweep(const PathSegment& seg, const CollisionModel& model, double spacing) {
    const double dist = segment_distance(seg);
    const double turn = segment_turn(seg);
    const double extent = std::abs(dist) + std::abs(turn) * model.reach();
    const int steps =
        std::max(1, static_cast<int>(std::ceil(extent / spacing)));
    circles_.reserve(static_cast<std::size_t>(steps) * model.circles.size());
    for (int k = 1; k <= steps; ++k) {
      const double f = static_cast<double>(k) / steps;
      if (turn == 0.0) {
        for (const Circle& c : model.circles) {
          circles_.push_back({{c.center.x + f * dist, c.center.y}, c.radius});
        }
        continue;
      }
      const Pose2 rel = integrate_unicycle({}, dist, turn, f);
      for (const Circle& c : model.circles) {
        circles_.push_back({transform_point(rel, c.center), c.radius});
      }
    }
    // Enclosing circle of the whole sweep: if it is clear, so is every
    // footprint circle inside it.
    Vec2 lo{circles_[0].center}, hi{circles_[0].center};
    for (const Circle& c : circles_) {
      lo = {std::min(lo.x, c.center.x), std::min(lo.y, c.center.y)};
      hi = {std::max(hi.x, c.center.x), std::max(hi.y, c.center.y)};
    }
    bound_.center = {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
    for (const Circle& c : circles_) {
      bound_.radius = std::max(bound_.radius,
                               distance(bound_.center, c.center) + c.radius);
    }
  }

  bool blocked(const Pose2& from, const CollisionChecker& checker) const {
    const double c = std::cos(from.theta);
    const double s = std::sin(from.theta);
    const Vec2 wb{from.x + c * bound_.center.x - s * bound_.center.y,
                  from.y + s * bound_.center.x + c * bound_.center.y};
    if (!checker.circle_collides(wb, bound_.radius)) return false;
    for (const Circle& fp : circles_) {
      const Vec2 w{from.x + c * fp.center.x - s * fp.center.y,
                   from.y + s * fp.center.x + c * fp.center.y};
      if (checker.circle_collides(w, fp.radius)) return true;
    }
    return false;
  }

 private:
  std::vector<Circle> circles_;
  Circle bound_;
};

// Shortest 8-connected grid distance from every cell to the goal cell,
// treating a cell as blocked only when a pose there is certainly in
// collision (the disk every footprint contains, shrunk by half a cell
// diagonal, touches an obstacle). Unreached cells hold infinity.
class GridDistance {
 public:
  GridDistance(const Bounds& b, double res, const Vec2& goal,
               const CollisionModel& model, const CollisionChecker& checker)
      : b_(b), res_(res) {
    nx_ = std::max(1, static_cast<int>(std::ceil(b.width() / res)));
    ny_ = std::max(1, static_cast<int>(std::ceil(b.height() / res)));
    dist_.assign(static_cast<std::size_t>(nx_) * ny_,
                 std::numeric_limits<double>::infinity());
    double core = 0.0;
    for (const Circle& c : model.circles) {
      core = std::max(core, c.radius - std::hypot(c.center.x, c.center.y));
    }
    const double probe = core - 0.5 * std::sqrt(2.0) * res;
    if (probe <= 0.0) return;  // nothing certain; heuristic stays Euclidean
    std::vector<char> blocked(dist_.size(), 0);
    for (int iy = 0; iy < ny_; ++iy) {
      for (int ix = 0; ix < nx_; ++ix) {
        const Vec2 c{b.min_x + (ix + 0.5) * res, b.min_y + (iy + 0.5) * res};
        blocked[index(ix, iy)] = checker.circle_collides(c, probe) ? 1 : 0;
      }
    }
    const long g = cell(goal);
    if (g < 0 || blocked[g]) return;
    using Item = std::pair<double, long>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist_[g] = 0.0;
    open.emplace(0.0, g);
    const double diag = std::sqrt(2.0) * res;
    while (!open.empty()) {
      const auto [d, k] = open.top();
      open.pop();
      if (d > dist_[k]) continue;
      const int ix = static_cast<int>(k % nx_);
      const int iy = static_cast<int>(k / nx_);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int jx = ix + dx, jy = iy + dy;
          if (jx < 0 || jy < 0 || jx >= nx_ || jy >= ny_) continue;
          const std::size_t j = index(jx, jy);
          if (blocked[j]) continue;
          const double nd = d + ((dx != 0 && dy != 0) ? diag : res);
          if (nd < dist_[j]) {
            dist_[j] = nd;
            open.emplace(nd, static_cast<long>(j));
          }
        }
      }
    }
  }

  // Lower estimate of the free-space path length from p to the goal.
  double lower_bound(const Vec2& p) const {
    const long k = cell(p);
    if (k < 0 || !std::isfinite(dist_[k])) return 0.0;
    // Octile paths overestimate straight runs by at most this factor, and
    // snapping both ends to cell centers costs at most a diagonal each.
    constexpr double kOctileStretch = 1.0824;
    return std::max(0.0, dist_[k] / kOctileStretch - 2.0 * std::sqrt(2.0) * res_);
  }

 private:
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * nx_ + ix;
  }
  long cell(const Vec2& p) const {
    const int ix = static_cast<int>(std::floor((p.x - b_.min_x) / res_));
    const int iy = static_cast<int>(std::floor((p.y - b_.min_y) / res_));
    if (ix < 0 || iy < 0 || ix >= nx_ || iy >= ny_) return -1;
    return static_cast<long>(index(ix, iy));
  }

  Bounds b_;
  double res_;
  int nx_ = 1, ny_ = 1;
  std::vector<double> dist_;
};

struct SearchNode {
  Pose2 pose;
  double g = 0.0;
  int parent = -1;
  PathSegment segment;
  int motion = 0;  // motion class of the segment leading here, 0 at start
};

}  // namespace

Trajectory profile_path(const Pose2& start,
                        const std::vector<PathSegment>& segments,
                        const MotionLimits& limits, double sample_spacing) {
  const std::vector<PathSegment> segs = merge_segments(segments);
  std::vector<TrajectorySample> out;
  Pose2 pose{start.x, start.y, wrap_angle(start.theta)};
  double t = 0.0;

  std::size_t i = 0;
  while (i < segs.size()) {
    // A run is a maximal block of segments in the same motion class.
    std::size_t j = i;
    double total = 0.0;
    double max_curv = 0.0;
    const int cls = motion_class(segs[i]);
    while (j < segs.size() && motion_class(segs[j]) == cls) {
      total += segment_extent(segs[j]);
      max_curv = std::max(max_curv, std::abs(segs[j].curvature));
      ++j;
    }
    const bool rotate = segs[i].kind == PathSegment::Kind::kRotate;
    double cap = rotate ? limits.omega_max : limits.v_max;
    if (!rotate && max_curv > 0.0) {
      cap = std::min(cap, limits.omega_max / max_curv);
    }
    const TrapezoidProfile profile(total, cap,
                                   rotate ? limits.alpha_max : limits.a_max);
    double s_run = 0.0;
    for (std::size_t k = i; k < j; ++k) {
      const PathSegment& seg = segs[k];
      const double extent = segment_extent(seg);
      const int n = std::max(
          1, static_cast<int>(std::ceil(extent / sample_spacing - 1e-9)));
      for (int m = 0; m < n; ++m) {
        const double sa = s_run + extent * m / n;
        const double sb = s_run + extent * (m + 1) / n;
        const double dt = profile.time_at(sb) - profile.time_at(sa);
        TrajectorySample sample{t, pose, 0.0, 0.0};
        if (rotate) {
          sample.omega = std::clamp((seg.angle > 0 ? 1.0 : -1.0) * (sb - sa) / dt,
                                    -limits.omega_max, limits.omega_max);
        } else {
          sample.v = std::clamp((seg.length > 0 ? 1.0 : -1.0) * (sb - sa) / dt,
                                -limits.v_max, limits.v_max);
          sample.omega = std::clamp(seg.curvature * sample.v,
                                    -limits.omega_max, limits.omega_max);
        }
        out.push_back(sample);
        pose = integrate_unicycle(pose, sample.v, sample.omega, dt);
        t += dt;
      }
      s_run += extent;
    }
    i = j;
  }
  out.push_back({t, pose, 0.0, 0.0});
  return Trajectory(std::move(out));
}

Pose2 pre_grasp_pose(const Pose2& object_pose, const Pose2& grasp_offset) {
  return compose(object_pose, grasp_offset);
}

Pose2 held_object_pose(const Pose2& robot_pose, const Pose2& grasp_offset) {
  return compose(robot_pose, inverse(grasp_offset));
}

TrajectoryPlanner::TrajectoryPlanner(MotionLimits limits, PlannerConfig config)
    : limits_(limits), config_(config) {
  if (limits_.v_max <= 0.0 || limits_.omega_max <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "motion limits must be positive");
  }
  if (config_.resolution <= 0.0 || config_.heading_bins < 4 ||
      config_.check_spacing <= 0.0 || config_.sample_spacing <= 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "invalid planner configuration");
  }
}

Trajectory TrajectoryPlanner::plan(const Pose2& start, const Pose2& goal,
                                   const CollisionModel& model,
                                   const OccupancyMap& map) const {
  return plan(start, goal, model, map, nullptr);
}

Trajectory TrajectoryPlanner::plan(const Pose2& start_in, const Pose2& goal_in,
                                   const CollisionModel& model,
                                   const OccupancyMap& map,
                                   Stats* stats) const {
  const Pose2 start{start_in.x, start_in.y, wrap_angle(start_in.theta)};
  const Pose2 goal{goal_in.x, goal_in.y, wrap_angle(goal_in.theta)};
  if (stats) *stats = {};

  if (collision_check(goal, model, map)) {
    throw Error(ErrorCode::kGoalInCollision, "goal pose is in collision");
  }
  if (collision_check(start, model, map)) {
    throw Error(ErrorCode::kStartInCollision, "start pose is in collision");
  }
  if (distance(start, goal) == 0.0 && start.theta == goal.theta) {
    return Trajectory::stationary(start);
  }

  // Motions are checked at discrete poses no more than check_spacing apart
  // (footprint displacement), so inflating by half that spacing makes every
  // intermediate pose collision free at the nominal margin.
  const CollisionChecker checker(map, 0.5 * config_.check_spacing,
                                 config_.resolution);
  auto motion_blocked = [&](const Pose2& from, const PathSegment& seg) {
    return Sweep(seg, model, config_.check_spacing).blocked(from, checker);
  };

  const double v = limits_.v_max;
  const double w = limits_.omega_max;
  const double bin = 2.0 * kPi / config_.heading_bins;
  const double max_curv = w / v;
  const double step =
      std::clamp(bin / max_curv, 2.0 * config_.resolution, 1.0);

  std::vector<PathSegment> primitives;
  const std::vector<double> dirs =
      config_.allow_backward ? std::vector<double>{1.0, -1.0}
                             : std::vector<double>{1.0};
  for (double dir : dirs) {
    for (double curv : {0.0, max_curv, -max_curv, 0.5 * max_curv,
                        -0.5 * max_curv}) {
      primitives.push_back(PathSegment::translate(dir * step, curv));
    }
  }
  primitives.push_back(PathSegment::rotate(bin));
  primitives.push_back(PathSegment::rotate(-bin));
  std::vector<Sweep> sweeps;
  for (const PathSegment& prim : primitives) {
    sweeps.emplace_back(prim, model, config_.check_spacing);
  }

  auto seg_cost = [&](const PathSegment& seg) {
    return seg.kind == PathSegment::Kind::kRotate ? std::abs(seg.angle) / w
                                                  : std::abs(seg.length) / v;
  };
  auto switch_cost = [&](int from, int to) {
    return (from != 0 && from != to) ? config_.direction_switch_penalty : 0.0;
  };
  std::optional<GridDistance> grid;
  if (config_.grid_heuristic) {
    grid.emplace(map.bounds, config_.resolution, position(goal), model, checker);
  }
  auto heuristic = [&](const Pose2& p) {
    double d = distance(p, goal);
    if (grid) d = std::max(d, grid->lower_bound(position(p)));
    return config_.heuristic_weight * d / v;
  };

  // Turn-drive-turn connection to the exact goal pose, forward or backward.
  auto direct_connection =
      [&](const SearchNode& node) -> std::optional<std::vector<PathSegment>> {
    const double d = distance(node.pose, goal);
    std::vector<std::pair<double, std::vector<PathSegment>>> options;
    if (d < 1e-12) {
      options.push_back(
          {0.0, {PathSegment::rotate(wrap_angle(goal.theta - node.pose.theta))}});
    } else {
      const double bearing =
          std::atan2(goal.y - node.pose.y, goal.x - node.pose.x);
      for (double dir : dirs) {
        const double heading =
            dir > 0 ? bearing : wrap_angle(bearing + kPi);
        std::vector<PathSegment> segs{
            PathSegment::rotate(wrap_angle(heading - node.pose.theta)),
            PathSegment::translate(dir * d),
            PathSegment::rotate(wrap_angle(goal.theta - heading))};
        double cost = 0.0;
        int motion = node.motion;
        for (const PathSegment& s : segs) {
          if (segment_extent(s) <= 0.0) continue;
          cost += seg_cost(s) + switch_cost(motion, motion_class(s));
          motion = motion_class(s);
        }
        options.push_back({cost, std::move(segs)});
      }
      std::stable_sort(options.begin(), options.end(),
                       [](const auto& a, const auto& b) {
                         return a.first < b.first;
                       });
    }
    for (auto& [cost, segs] : options) {
      Pose2 p = node.pose;
      bool blocked = false;
      for (const PathSegment& s : segs) {
        if (segment_extent(s) <= 0.0) continue;
        if (motion_blocked(p, s)) {
          blocked = true;
          break;
        }
        p = integrate_unicycle(p, segment_distance(s), segment_turn(s), 1.0);
      }
      if (!blocked) return segs;
    }
    return std::nullopt;
  };

  const Bounds& b = map.bounds;
  const int nx = std::max(1, static_cast<int>(std::ceil(b.width() / config_.resolution)));
  const int ny = std::max(1, static_cast<int>(std::ceil(b.height() / config_.resolution)));
  const int nb = config_.heading_bins;
  auto cell_of = [&](const Pose2& p) -> long {
    const int ix = static_cast<int>(std::floor((p.x - b.min_x) / config_.resolution));
    const int iy = static_cast<int>(std::floor((p.y - b.min_y) / config_.resolution));
    if (ix < 0 || iy < 0 || ix >= nx || iy >= ny) return -1;
    int ib = static_cast<int>(std::lround(p.theta / bin)) % nb;
    if (ib < 0) ib += nb;
    return (static_cast<long>(iy) * nx + ix) * nb + ib;
  };
  std::vector<bool> closed(static_cast<std::size_t>(nx) * ny * nb, false);

  std::vector<SearchNode> nodes;
  using Entry = std::tuple<double, std::size_t, int>;  // f, sequence, node
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::size_t sequence = 0;
  nodes.push_back({start, 0.0, -1, {}, 0});
  open.emplace(heuristic(start), sequence++, 0);

  auto reconstruct = [&](int idx, std::vector<PathSegment> tail) {
    std::vector<PathSegment> path;
    for (int k = idx; nodes[k].parent >= 0; k = nodes[k].parent) {
      path.push_back(nodes[k].segment);
    }
    std::reverse(path.begin(), path.end());
    path.insert(path.end(), tail.begin(), tail.end());
    return profile_path(start, path, limits_, config_.sample_spacing);
  };

  std::size_t expansions = 0;
  while (!open.empty()) {
    const auto [f, seq, idx] = open.top();
    open.pop();
    const long cell = cell_of(nodes[idx].pose);
    if (cell < 0 || closed[static_cast<std::size_t>(cell)]) continue;
    closed[static_cast<std::size_t>(cell)] = true;
    ++expansions;
    if (stats) stats->expansions = expansions;
    if (expansions > config_.max_expansions) break;

    const SearchNode node = nodes[idx];
    const double to_goal = distance(node.pose, goal);
    if (to_goal <= config_.analytic_radius ||
        expansions % static_cast<std::size_t>(config_.analytic_every) == 1) {
      if (auto tail = direct_connection(node)) {
        return reconstruct(idx, std::move(*tail));
      }
    }
    if (to_goal <= config_.goal_tolerance_xy &&
        std::abs(wrap_angle(goal.theta - node.pose.theta)) <=
            config_.goal_tolerance_theta) {
      return reconstruct(idx, {});
    }

    for (std::size_t p = 0; p < primitives.size(); ++p) {
      const PathSegment& prim = primitives[p];
      const Pose2 next = integrate_unicycle(node.pose, segment_distance(prim),
                                            segment_turn(prim), 1.0);
      const long next_cell = cell_of(next);
      if (next_cell < 0 || closed[static_cast<std::size_t>(next_cell)]) continue;
      if (sweeps[p].blocked(node.pose, checker)) continue;
      const int cls = motion_class(prim);
      const double g = node.g + seg_cost(prim) + switch_cost(node.motion, cls);
      nodes.push_back({next, g, idx, prim, cls});
      open.emplace(g + heuristic(next), sequence++,
                   static_cast<int>(nodes.size() - 1));
    }
  }
  throw Error(ErrorCode::kNoPathFound,
              "search exhausted after " + std::to_string(expansions) +
                  " expansions");
}

Trajectory plan_se2(const Pose2& start, const Pose2& goal,
                    const CollisionModel& model, const OccupancyMap& map,
                    const MotionLimits& limits, const PlannerConfig& config) {
  return TrajectoryPlanner(limits, config).plan(start, goal, model, map);
}

CoarseToFineResult coarse_to_fine(
    const Pose2& robot, const Pose2& approx_object_pose,
    const Pose2& true_object_pose, const Pose2& grasp_offset,
    const OccupancyMap& map, const CollisionModel& model,
    const TrajectoryPlanner& planner,
    const std::optional<std::string>& active_object) {
  CoarseToFineResult result;
  const Vec2 approx = position(approx_object_pose);
  if (distance(position(robot), approx) <= kDetectionRadius) {
    result.trigger_pose = robot;
  } else {
    const Trajectory approach = planner.plan(
        robot, pre_grasp_pose(approx_object_pose, grasp_offset), model, map);
    const auto& samples = approach.samples();
    std::size_t trigger = samples.size() - 1;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (distance(position(samples[i].pose), approx) <= kDetectionRadius) {
        trigger = i;
        break;
      }
    }
    result.coarse = approach.truncated(trigger);
    result.trigger_pose = samples[trigger].pose;
  }
  OccupancyMap detected = map;
  if (active_object) {
    detected.place_object(*active_object, position(true_object_pose));
  }
  result.fine = planner.plan(result.trigger_pose,
                             pre_grasp_pose(true_object_pose, grasp_offset),
                             model, detected);
  return result;
}

}  // namespace rearrange
