#include "rearrange/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rearrange/error.hpp"
#include "rearrange/kinematics.hpp"

namespace rearrange {

Trajectory Trajectory::stationary(const Pose2& pose) {
  return Trajectory({{0.0, pose, 0.0, 0.0}});
}

double Trajectory::path_length() const {
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
    len += std::abs(samples_[i].v) * (samples_[i + 1].t - samples_[i].t);
  }
  return len;
}

std::size_t Trajectory::interval_at(double t) const {
  if (samples_.size() < 2) return 0;
  auto it = std::upper_bound(
      samples_.begin(), samples_.end(), t,
      [](double value, const TrajectorySample& s) { return value < s.t; });
  if (it == samples_.begin()) return 0;
  const auto idx = static_cast<std::size_t>(it - samples_.begin()) - 1;
  return std::min(idx, samples_.size() - 2);
}

Pose2 Trajectory::pose_at(double t) const {
  if (samples_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "pose_at on empty trajectory");
  }
  if (t <= samples_.front().t) return samples_.front().pose;
  if (t >= samples_.back().t) return samples_.back().pose;
  const TrajectorySample& s = samples_[interval_at(t)];
  return integrate_unicycle(s.pose, s.v, s.omega, t - s.t);
}

Trajectory Trajectory::truncated(std::size_t last) const {
  std::vector<TrajectorySample> out(
      samples_.begin(),
      samples_.begin() + static_cast<std::ptrdiff_t>(
                             std::min(last + 1, samples_.size())));
  if (!out.empty()) {
    out.back().v = 0.0;
    out.back().omega = 0.0;
  }
  return Trajectory(std::move(out));
}

Trajectory concatenate(const Trajectory& a, const Trajectory& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  std::vector<TrajectorySample> out = a.samples();
  const double offset = a.duration();
  // b's first sample replaces a's terminal (zero-control) sample.
  out.back().v = b.samples().front().v;
  out.back().omega = b.samples().front().omega;
  for (std::size_t i = 1; i < b.size(); ++i) {
    TrajectorySample s = b.samples()[i];
    s.t += offset;
    out.push_back(s);
  }
  return Trajectory(std::move(out));
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  out << "# trajectory v1\n";
  char line[256];
  for (const TrajectorySample& s : traj.samples()) {
    std::snprintf(line, sizeof(line), "%.6f %.6f %.6f %.6f %.6f %.6f\n", s.t,
                  s.pose.x, s.pose.y, s.pose.theta, s.v, s.omega);
    out << line;
  }
}

void write_trajectory_file(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  write_trajectory(out, traj);
}

Trajectory read_trajectory(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# trajectory v1") {
    throw Error(ErrorCode::kParseError, "missing '# trajectory v1' header");
  }
  std::vector<TrajectorySample> samples;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    TrajectorySample s;
    if (!(fields >> s.t >> s.pose.x >> s.pose.y >> s.pose.theta >> s.v >>
          s.omega)) {
      throw Error(ErrorCode::kParseError,
                  "trajectory line " + std::to_string(lineno) +
                      ": expected 6 numeric fields");
    }
    samples.push_back(s);
  }
  return Trajectory(std::move(samples));
}

Trajectory read_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  return read_trajectory(in);
}

}  // namespace rearrange
