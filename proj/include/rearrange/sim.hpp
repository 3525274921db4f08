#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rearrange/error.hpp"
#include "rearrange/kinematics.hpp"
#include "rearrange/scenario.hpp"
#include "rearrange/task_planner.hpp"
#include "rearrange/trajectory.hpp"

namespace rearrange {

/// Commanded or actual body velocity. The unicycle plant ignores v_y.
struct VelocityCommand {
  double v_x = 0.0;
  double v_y = 0.0;
  double omega = 0.0;

  friend bool operator==(const VelocityCommand&, const VelocityCommand&) = default;
};

/// Zero-mean Gaussian velocity noise calibrated by mean absolute error.
struct NoiseModel {
  double mae_v = 0.0486;
  double mae_omega = 0.0601;
  double sd_v = 0.0319;  // reported alongside the MAE; not fitted
  std::uint64_t seed = 0;

  static NoiseModel none(std::uint64_t seed = 0) { return {0.0, 0.0, 0.0, seed}; }
};

/// Standard deviation of N(0, sigma) whose absolute value has mean `mae`.
double sigma_from_mae(double mae);

/// Seeded noise source. The i-th call to apply() depends only on the seed
/// and i.
class NoiseStream {
 public:
  explicit NoiseStream(const NoiseModel& model);

  VelocityCommand apply(const VelocityCommand& command);
  std::uint64_t calls() const { return calls_; }

 private:
  double sigma_v_;
  double sigma_omega_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uint64_t calls_ = 0;
};

VelocityCommand apply_noise(const VelocityCommand& command, NoiseStream& stream);

/// Pose-feedback tracking law:
///   v = v_ref cos(e_theta) + k_x e_x
///   omega = omega_ref + k_y v_ref e_y + k_theta sin(e_theta)
/// with (e_x, e_y) the reference position in the robot frame.
struct TrackerConfig {
  double k_x = 1.0;
  double k_y = 4.0;
  double k_theta = 2.0;
  double lookahead = 0.0;  // meters the reference is advanced, at v_max
  double control_rate = 50.0;
  double settle_time = 1.0;
  double settle_position_tolerance = 0.01;
  double settle_heading_tolerance = 0.02;
  double divergence_limit = 1.0;
};

void validate(const TrackerConfig& config);

struct TrackingMetrics {
  double max_error = 0.0;   // cross-track, meters
  double mean_error = 0.0;
  double completion_time = 0.0;
  double distance = 0.0;
  std::size_t steps = 0;
};

struct TrackingResult {
  Trajectory executed;
  TrackingMetrics metrics;
  bool stopped = false;  // the step observer asked to stop
};

/// Called after every control step with the new robot pose; returning true
/// stops tracking.
using StepObserver = std::function<bool(const Pose2&)>;

/// Closed-loop tracking: commands are saturated to `limits`, perturbed by
/// the noise stream and integrated exactly. After the reference ends the
/// robot regulates to the final pose for at most settle_time. Throws
/// DIVERGENCE when the cross-track error exceeds divergence_limit.
TrackingResult track_trajectory(const Trajectory& traj, const Pose2& start,
                                const TrackerConfig& tracker, NoiseStream& noise,
                                const MotionLimits& limits,
                                const StepObserver& observer = {});

TrackingResult track_trajectory(const Trajectory& traj, const Pose2& start,
                                const TrackerConfig& tracker,
                                const NoiseModel& noise,
                                const MotionLimits& limits);

/// Gerono lemniscate x = (w/2) cos s, y = (h/2) sin 2s traversed at constant
/// speed, starting at (w/2, 0) heading +y. Controls change every `dt`.
Trajectory figure_eight(double width = 12.0, double height = 6.0,
                        double speed = 0.3, double dt = 0.1);

/// Numerical arc length of the lemniscate above.
double figure_eight_length(double width = 12.0, double height = 6.0);

inline constexpr double kSuccessPositionError = 0.3;
inline constexpr double kSuccessHeadingError = 0.785398163397448309616;  // pi/4

/// Strict thresholds: success iff position < 0.3 m and heading < pi/4.
bool is_success(double position_error, double heading_error);

struct ObjectOutcome {
  std::string id;
  double position_error = 0.0;
  double heading_error = 0.0;
  bool success = false;
};

struct EpisodeResult {
  std::vector<ObjectOutcome> per_object;
  double completion_time = 0.0;  // tracking_time + dwell_time
  double tracking_time = 0.0;
  double dwell_time = 0.0;
  double total_distance = 0.0;
  int collision_events = 0;
  double max_tracking_error = 0.0;
  double mean_tracking_error = 0.0;
  int replans = 0;
  Trajectory executed;  // robot path, dwells as held samples

  int successes() const;
};

struct EpisodeStep {
  double t = 0.0;
  Pose2 robot;
  std::optional<std::size_t> held;  // object index
  Pose2 held_pose;
};

struct EpisodeOptions {
  double grasp_dwell = 3.0;
  double release_dwell = 3.0;
  /// Re-plan a stored leg that was collision-free at planning time but hits
  /// an object that has since been moved.
  bool replan_on_conflict = true;
  std::function<void(const EpisodeStep&)> on_step;
};

/// Raised when the executed footprint touches an obstacle. Carries the
/// partial result up to the abort.
class CollisionAbort : public Error {
 public:
  CollisionAbort(const std::string& message, EpisodeResult partial)
      : Error(ErrorCode::kCollisionAbort, message), partial_(std::move(partial)) {}
  const EpisodeResult& partial() const { return partial_; }

 private:
  EpisodeResult partial_;
};

/// Executes the plan task by task: track pre, grasp (object snaps to the
/// grasp offset), track post, release. Every control step is collision
/// checked with the phase's footprint and zero clearance margin.
EpisodeResult run_episode(const Scenario& scenario, const TaskPlan& plan,
                          const TrackerConfig& tracker, const NoiseModel& noise,
                          const EpisodeOptions& options = {});

inline constexpr double kTiltLimit = 0.8;

/// True iff |roll| > 0.8, |pitch| > 0.8 or the gripper lost contact.
bool check_termination(double roll, double pitch, bool gripper_contact);

}  // namespace rearrange
