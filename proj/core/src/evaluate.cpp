#include "nltrack/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "nltrack/errors.hpp"

namespace nlt {

void EvalConfig::validate() const {
  if (frame_step < 1) throw DomainError("frame_step must be >= 1");
  if (!(trans_threshold > 0) || !(rot_threshold_deg > 0)) throw DomainError("thresholds must be positive");
}

TrackResult OracleTracker::track(const RgbImage&, std::size_t index) {
  TrackResult r;
  r.pose = gt_.at(index);
  r.error = 0;
  return r;
}

TrackResult FixedPoseTracker::track(const RgbImage&, std::size_t) {
  TrackResult r;
  r.pose = pose_;
  return r;
}

TrackResult ReplayTracker::track(const RgbImage&, std::size_t) {
  if (cursor_ >= log_.size()) throw DomainError("pose log is shorter than the evaluated sequence");
  TrackResult r;
  r.pose = log_[cursor_++];
  r.error = std::numeric_limits<double>::quiet_NaN();
  return r;
}

RunReport evaluate(const Sequence& sequence, FrameTracker& tracker, const EvalConfig& config,
                   std::vector<Pose>* pose_log, const FrameObserver& observer) {
  config.validate();
  sequence.validate();
  RunReport report;
  report.sequence = sequence.name;
  report.method = tracker.name();
  report.config = config;

  const bool decode = tracker.needs_frames();
  const auto S = static_cast<std::size_t>(config.frame_step);
  tracker.initialize(decode ? sequence.frame(0) : RgbImage{}, sequence.gt_poses[0], 0);
  if (pose_log) pose_log->assign(1, sequence.gt_poses[0]);

  double iterations = 0, inner = 0, wall = 0;
  int successes = 0;
  for (std::size_t i = S; i < sequence.size(); i += S) {
    const RgbImage frame = decode ? sequence.frame(i) : RgbImage{};
    const auto t0 = std::chrono::steady_clock::now();
    const TrackResult r = tracker.track(frame, i);
    const auto t1 = std::chrono::steady_clock::now();

    FrameRecord rec;
    rec.frame = i;
    rec.pose = r.pose;
    rec.error = r.error;
    rec.iterations = r.iterations;
    rec.inner_invocations = r.inner_invocations;
    rec.wall_ms = config.record_timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
    const Pose& gt = sequence.gt_poses[i];
    rec.rot_err_deg = rotation_error(r.pose.R, gt.R) * 180.0 / std::numbers::pi;
    rec.trans_err = translation_error(r.pose.t, gt.t);
    rec.success = rec.trans_err < config.trans_threshold && rec.rot_err_deg < config.rot_threshold_deg;
    if (pose_log) pose_log->push_back(r.pose);
    if (observer) observer(frame, rec);

    tracker.commit(frame, rec.success);
    if (!rec.success && config.reset_on_failure) {
      tracker.reset(gt, i);
      ++report.resets;
    }
    successes += rec.success ? 1 : 0;
    iterations += rec.iterations;
    inner += rec.inner_invocations;
    wall += rec.wall_ms;
    report.frames.push_back(rec);
  }
  const double n = static_cast<double>(report.frames.size());
  if (n > 0) {
    report.success_rate = successes / n;
    report.mean_iterations = iterations / n;
    report.mean_inner_invocations = inner / n;
    report.mean_wall_ms = wall / n;
  }
  return report;
}

}  // namespace nlt
