#include "rearrange/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rearrange/collision.hpp"
#include "rearrange/planner.hpp"

namespace rearrange {
namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double s = 0.0;
  if (len2 > 0.0) {
    s = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  }
  return distance(p, Vec2{a.x + s * dx, a.y + s * dy});
}

// Distance to the reference polyline restricted to a time window, so that
// self-crossing paths are not matched against the wrong pass.
double cross_track_error(const Trajectory& traj, const Vec2& p, double t,
                         double window) {
  const auto& s = traj.samples();
  if (s.size() == 1) return distance(p, position(s.front().pose));
  const std::size_t lo = traj.interval_at(t - window);
  const std::size_t hi = std::min(traj.interval_at(t + window) + 1, s.size() - 1);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i < hi; ++i) {
    best = std::min(best, point_segment_distance(p, position(s[i].pose),
                                                 position(s[i + 1].pose)));
  }
  return best;
}

constexpr double kCrossTrackWindow = 2.0;

struct LemniscateTable {
  std::vector<double> length;   // cumulative arc length
  std::vector<double> heading;  // unwrapped tangent angle
};

LemniscateTable lemniscate_table(double width, double height, int n) {
  const double a = width / 2.0;
  const double b = height / 2.0;
  auto tangent = [&](double s) {
    return Vec2{-a * std::sin(s), 2.0 * b * std::cos(2.0 * s)};
  };
  auto speed = [&](double s) {
    const Vec2 d = tangent(s);
    return std::sqrt(d.x * d.x + d.y * d.y);
  };
  LemniscateTable table;
  table.length.resize(n + 1);
  table.heading.resize(n + 1);
  const double h = 2.0 * std::numbers::pi / n;
  table.length[0] = 0.0;
  double previous = std::atan2(tangent(0.0).y, tangent(0.0).x);
  table.heading[0] = previous;
  for (int i = 1; i <= n; ++i) {
    const double s0 = (i - 1) * h;
    // Simpson's rule per cell.
    table.length[i] = table.length[i - 1] +
                      h / 6.0 * (speed(s0) + 4.0 * speed(s0 + h / 2.0) + speed(s0 + h));
    const Vec2 d = tangent(i * h);
    const double raw = std::atan2(d.y, d.x);
    table.heading[i] = table.heading[i - 1] + wrap_angle(raw - previous);
    previous = raw;
  }
  return table;
}

double heading_at_length(const LemniscateTable& table, double l) {
  const auto it = std::lower_bound(table.length.begin(), table.length.end(), l);
  if (it == table.length.begin()) return table.heading.front();
  if (it == table.length.end()) return table.heading.back();
  const std::size_t i = static_cast<std::size_t>(it - table.length.begin());
  const double l0 = table.length[i - 1];
  const double l1 = table.length[i];
  const double u = l1 > l0 ? (l - l0) / (l1 - l0) : 0.0;
  return table.heading[i - 1] + u * (table.heading[i] - table.heading[i - 1]);
}

constexpr int kLemniscateCells = 200000;

}  // namespace

double sigma_from_mae(double mae) {
  if (!(mae >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "mae must be >= 0");
  return mae * std::sqrt(std::numbers::pi / 2.0);
}

NoiseStream::NoiseStream(const NoiseModel& model)
    : sigma_v_(sigma_from_mae(model.mae_v)),
      sigma_omega_(sigma_from_mae(model.mae_omega)),
      engine_(model.seed) {}

VelocityCommand NoiseStream::apply(const VelocityCommand& command) {
  ++calls_;
  // Three draws per call regardless of sigma keep streams aligned.
  const double nx = normal_(engine_);
  const double ny = normal_(engine_);
  const double nw = normal_(engine_);
  VelocityCommand out = command;
  if (sigma_v_ > 0.0) {
    out.v_x += sigma_v_ * nx;
    out.v_y += sigma_v_ * ny;
  }
  if (sigma_omega_ > 0.0) out.omega += sigma_omega_ * nw;
  return out;
}

VelocityCommand apply_noise(const VelocityCommand& command, NoiseStream& stream) {
  return stream.apply(command);
}

void validate(const TrackerConfig& c) {
  if (!(c.k_x > 0.0 && c.k_y > 0.0 && c.k_theta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tracker gains must be > 0");
  }
  if (!(c.control_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "control_rate must be > 0");
  }
  if (!(c.lookahead >= 0.0 && c.settle_time >= 0.0 && c.divergence_limit > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "lookahead and settle_time must be >= 0, divergence_limit > 0");
  }
}

TrackingResult track_trajectory(const Trajectory& traj, const Pose2& start,
                                const TrackerConfig& tracker, NoiseStream& noise,
                                const MotionLimits& limits,
                                const StepObserver& observer) {
  if (traj.empty()) throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  validate(tracker);
  TrackingResult result;
  const double duration = traj.duration();
  if (duration <= 0.0) {
    result.executed = Trajectory::stationary(start);
    return result;
  }

  const double dt = 1.0 / tracker.control_rate;
  const double shift = tracker.lookahead / limits.v_max;
  std::vector<TrajectorySample> samples{{0.0, start, 0.0, 0.0}};
  Pose2 pose = start;
  double error_sum = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const bool tracking = t < duration;
    const double tr = std::min(t + shift, duration);
    const Pose2 ref = traj.pose_at(tr);
    const double dx = ref.x - pose.x;
    const double dy = ref.y - pose.y;
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    const double ex = c * dx + s * dy;
    const double ey = -s * dx + c * dy;
    const double eth = wrap_angle(ref.theta - pose.theta);
    if (!tracking) {
      const bool settled = std::sqrt(dx * dx + dy * dy) < tracker.settle_position_tolerance &&
                           std::abs(eth) < tracker.settle_heading_tolerance;
      if (settled || t >= duration + tracker.settle_time) break;
    }
    double v_ref = 0.0, w_ref = 0.0;
    if (tracking) {
      const TrajectorySample& active = traj.samples()[traj.interval_at(tr)];
      v_ref = active.v;
      w_ref = active.omega;
    }

    VelocityCommand cmd;
    cmd.v_x = std::clamp(v_ref * std::cos(eth) + tracker.k_x * ex, -limits.v_max, limits.v_max);
    cmd.omega = std::clamp(w_ref + tracker.k_y * v_ref * ey + tracker.k_theta * std::sin(eth),
                           -limits.omega_max, limits.omega_max);
    const VelocityCommand actual = apply_noise(cmd, noise);

    samples.back().v = actual.v_x;
    samples.back().omega = actual.omega;
    pose = integrate_unicycle(pose, actual.v_x, actual.omega, dt);
    samples.push_back({static_cast<double>(k + 1) * dt, pose, 0.0, 0.0});
    result.metrics.distance += std::abs(actual.v_x) * dt;
    ++result.metrics.steps;

    const double err = cross_track_error(traj, position(pose), tr, kCrossTrackWindow);
    result.metrics.max_error = std::max(result.metrics.max_error, err);
    error_sum += err;
    if (err > tracker.divergence_limit) {
      throw Error(ErrorCode::kDivergence,
                  "cross-track error " + std::to_string(err) + " m at t=" +
                      std::to_string(t + dt) + " s");
    }
    if (observer && observer(pose)) {
      result.stopped = true;
      break;
    }
  }
  result.metrics.completion_time = samples.back().t;
  if (result.metrics.steps > 0) {
    result.metrics.mean_error = error_sum / static_cast<double>(result.metrics.steps);
  }
  result.executed = Trajectory(std::move(samples));
  return result;
}

TrackingResult track_trajectory(const Trajectory& traj, const Pose2& start,
                                const TrackerConfig& tracker,
                                const NoiseModel& noise,
                                const MotionLimits& limits) {
  NoiseStream stream(noise);
  return track_trajectory(traj, start, tracker, stream, limits);
}

double figure_eight_length(double width, double height) {
  return lemniscate_table(width, height, kLemniscateCells).length.back();
}

Trajectory figure_eight(double width, double height, double speed, double dt) {
  if (!(width > 0.0 && height > 0.0 && speed > 0.0 && dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "figure_eight parameters must be > 0");
  }
  const LemniscateTable table = lemniscate_table(width, height, kLemniscateCells);
  const double total = table.length.back();
  const double step = speed * dt;
  const std::size_t n = static_cast<std::size_t>(std::ceil(total / step - 1e-9));

  std::vector<TrajectorySample> samples;
  samples.reserve(n + 1);
  Pose2 pose{width / 2.0, 0.0, wrap_angle(table.heading.front())};
  double heading = table.heading.front();
  for (std::size_t k = 0; k <= n; ++k) {
    const double l = std::min(static_cast<double>(k) * step, total);
    samples.push_back({l / speed, pose, 0.0, 0.0});
    if (k == n) break;
    const double l_next = std::min(static_cast<double>(k + 1) * step, total);
    const double h = (l_next - l) / speed;
    const double next_heading = heading_at_length(table, l_next);
    samples.back().v = speed;
    samples.back().omega = (next_heading - heading) / h;
    pose = integrate_unicycle(pose, speed, samples.back().omega, h);
    heading = next_heading;
  }
  return Trajectory(std::move(samples));
}

bool is_success(double position_error, double heading_error) {
  return position_error < kSuccessPositionError &&
         std::abs(heading_error) < kSuccessHeadingError;
}

int EpisodeResult::successes() const {
  return static_cast<int>(std::count_if(per_object.begin(), per_object.end(),
                                        [](const ObjectOutcome& o) { return o.success; }));
}

bool check_termination(double roll, double pitch, bool gripper_contact) {
  return std::abs(roll) > kTiltLimit || std::abs(pitch) > kTiltLimit || !gripper_contact;
}

EpisodeResult run_episode(const Scenario& scenario, const TaskPlan& plan,
                          const TrackerConfig& tracker, const NoiseModel& noise,
                          const EpisodeOptions& options) {
  validate(scenario);
  validate(tracker);
  const std::size_t n = scenario.size();
  if (plan.order.size() != n || plan.assignment.size() != n || plan.tasks.size() != n) {
    throw Error(ErrorCode::kInvalidArgument,
                "plan must carry one task with trajectories per object");
  }
  {
    std::vector<int> objs = plan.order, tgts = plan.assignment;
    std::sort(objs.begin(), objs.end());
    std::sort(tgts.begin(), tgts.end());
    for (std::size_t i = 0; i < n; ++i) {
      if (objs[i] != static_cast<int>(i) || tgts[i] != static_cast<int>(i)) {
        throw Error(ErrorCode::kInvalidArgument,
                    "plan order and assignment must be permutations");
      }
    }
  }

  NoiseStream stream(noise);
  const TrajectoryPlanner planner(scenario.limits);
  const OccupancyMap initial = initial_map(scenario);
  OccupancyMap world = initial;
  std::vector<Pose2> object_pose;
  for (const ObjectSpec& o : scenario.objects) object_pose.push_back(o.initial_pose);

  EpisodeResult result;
  Pose2 robot = scenario.robot_start;
  std::vector<TrajectorySample> path{{0.0, robot, 0.0, 0.0}};
  double error_sum = 0.0;
  std::size_t steps = 0;
  const double dt = 1.0 / tracker.control_rate;

  auto score = [&] {
    const std::vector<int> target_of = plan.target_of();
    result.per_object.clear();
    for (std::size_t j = 0; j < n; ++j) {
      const Pose2& goal = scenario.targets[target_of[j]];
      ObjectOutcome o;
      o.id = scenario.objects[j].id;
      o.position_error = distance(position(object_pose[j]), position(goal));
      o.heading_error = std::abs(wrap_angle(object_pose[j].theta - goal.theta));
      o.success = is_success(o.position_error, o.heading_error);
      result.per_object.push_back(o);
    }
    result.completion_time = result.tracking_time + result.dwell_time;
    result.mean_tracking_error = steps > 0 ? error_sum / static_cast<double>(steps) : 0.0;
    result.executed = Trajectory(path);
  };

  auto dwell = [&](double seconds) {
    result.dwell_time += seconds;
    path.push_back({path.back().t + seconds, robot, 0.0, 0.0});
  };

  auto run_leg = [&](Trajectory leg, const CollisionModel& model,
                     const OccupancyMap& phase_map, const OccupancyMap& planned_map,
                     std::optional<std::size_t> held) {
    if (options.replan_on_conflict && first_collision(leg, model, phase_map) &&
        !first_collision(leg, model, planned_map)) {
      try {
        leg = planner.plan(leg.start(), leg.end(), model, phase_map);
        ++result.replans;
      } catch (const Error&) {
        // Keep the stored leg; execution will report the collision.
      }
    }
    OccupancyMap exec_map = phase_map;
    exec_map.clearance_margin = 0.0;
    const double clock = path.back().t;
    std::size_t local = 0;
    bool hit = false;
    const auto observer = [&](const Pose2& pose) {
      ++local;
      if (options.on_step) {
        EpisodeStep step;
        step.t = clock + static_cast<double>(local) * dt;
        step.robot = pose;
        step.held = held;
        if (held) step.held_pose = held_object_pose(pose, scenario.objects[*held].grasp_offset);
        options.on_step(step);
      }
      hit = collision_check(pose, model, exec_map);
      return hit;
    };
    const TrackingResult r =
        track_trajectory(leg, robot, tracker, stream, scenario.limits, observer);

    const auto& s = r.executed.samples();
    path.back().v = s.front().v;
    path.back().omega = s.front().omega;
    for (std::size_t i = 1; i < s.size(); ++i) {
      TrajectorySample shifted = s[i];
      shifted.t += clock;
      path.push_back(shifted);
    }
    result.tracking_time += r.metrics.completion_time;
    result.total_distance += r.metrics.distance;
    result.max_tracking_error = std::max(result.max_tracking_error, r.metrics.max_error);
    error_sum += r.metrics.mean_error * static_cast<double>(r.metrics.steps);
    steps += r.metrics.steps;
    robot = r.executed.end();
    if (held) object_pose[*held] = held_object_pose(robot, scenario.objects[*held].grasp_offset);
    if (hit) {
      ++result.collision_events;
      score();
      throw CollisionAbort("collision at t=" + std::to_string(path.back().t) + " s",
                           result);
    }
  };

  const CollisionModel robot_only = robot_model(scenario);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = static_cast<std::size_t>(plan.order[k]);
    const ObjectSpec& obj = scenario.objects[j];

    run_leg(plan.tasks[k].pre, robot_only,
            update_map(world, std::nullopt, MapPhase::kPreGrasp),
            update_map(initial, std::nullopt, MapPhase::kPreGrasp), std::nullopt);

    object_pose[j] = held_object_pose(robot, obj.grasp_offset);
    world.place_object(obj.id, position(object_pose[j]));
    dwell(options.grasp_dwell);

    run_leg(plan.tasks[k].post, held_model(scenario, j),
            update_map(world, obj.id, MapPhase::kPostGrasp),
            update_map(initial, obj.id, MapPhase::kPostGrasp), j);

    world.place_object(obj.id, position(object_pose[j]));
    dwell(options.release_dwell);
  }
  score();
  return result;
}

}  // namespace rearrange
