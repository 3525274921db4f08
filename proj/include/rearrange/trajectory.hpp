#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rearrange/geometry.hpp"

namespace rearrange {

/// One control sample. (v, omega) is held constant over [t, t_next); the
/// last sample of a trajectory carries zero controls.
struct TrajectorySample {
  double t = 0.0;
  Pose2 pose;
  double v = 0.0;
  double omega = 0.0;

  friend bool operator==(const TrajectorySample&,
                         const TrajectorySample&) = default;
};

class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TrajectorySample> samples)
      : samples_(std::move(samples)) {}

  /// Single-sample trajectory of zero duration.
  static Trajectory stationary(const Pose2& pose);

  const std::vector<TrajectorySample>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }

  double duration() const { return samples_.empty() ? 0.0 : samples_.back().t; }
  const Pose2& start() const { return samples_.front().pose; }
  const Pose2& end() const { return samples_.back().pose; }

  /// Arc length traveled by the position (rotations in place add nothing).
  double path_length() const;

  /// Index of the control interval containing t (clamped).
  std::size_t interval_at(double t) const;

  /// Pose at time t, integrating the active constant twist from the
  /// preceding sample. Clamped to [0, duration].
  Pose2 pose_at(double t) const;

  /// Drops every sample after index `last` and zeroes its controls.
  Trajectory truncated(std::size_t last) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::vector<TrajectorySample> samples_;
};

/// Joins b after a, shifting b's clock. b must start where a ends.
Trajectory concatenate(const Trajectory& a, const Trajectory& b);

/// Plain-text dump: header `# trajectory v1`, then one `t x y theta v omega`
/// line per sample with 6 decimals.
void write_trajectory(std::ostream& out, const Trajectory& traj);
void write_trajectory_file(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory(std::istream& in);
Trajectory read_trajectory_file(const std::string& path);

}  // namespace rearrange
