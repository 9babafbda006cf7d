#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "nltrack/dataset.hpp"
#include "nltrack/tracker.hpp"

namespace nlt {

struct EvalConfig {
  int frame_step = 1;
  double trans_threshold = 0.05;  ///< metres
  double rot_threshold_deg = 5.0;
  bool reset_on_failure = true;
  bool record_timing = true;

  void validate() const;
};

struct FrameRecord {
  std::size_t frame = 0;
  Pose pose;
  double error = 0;
  double rot_err_deg = 0;
  double trans_err = 0;
  bool success = false;
  int iterations = 0;
  int inner_invocations = 0;
  double wall_ms = 0;
};

struct RunReport {
  std::string sequence;
  std::string method;
  EvalConfig config;
  std::vector<FrameRecord> frames;  ///< evaluated transitions (frame 0 excluded)
  double success_rate = 0;
  double mean_iterations = 0;
  double mean_inner_invocations = 0;
  double mean_wall_ms = 0;
  int resets = 0;
};

/// Pose source driven by evaluate(). Implementations keep per-sequence state.
class FrameTracker {
 public:
  virtual ~FrameTracker() = default;
  virtual std::string name() const = 0;
  virtual void initialize(const RgbImage& frame, const Pose& pose, std::size_t index) = 0;
  virtual TrackResult track(const RgbImage& frame, std::size_t index) = 0;
  virtual void commit(const RgbImage&, bool) {}
  virtual void reset(const Pose& pose, std::size_t index) = 0;
  /// False when track() ignores the image (frames are then not decoded).
  virtual bool needs_frames() const { return true; }
};

class ContourTracker final : public FrameTracker {
 public:
  explicit ContourTracker(Tracker tracker) : tracker_(std::move(tracker)) {}
  std::string name() const override { return to_string(tracker_.config().method); }
  void initialize(const RgbImage& frame, const Pose& pose, std::size_t) override { tracker_.initialize(frame, pose); }
  TrackResult track(const RgbImage& frame, std::size_t) override { return tracker_.track(frame); }
  void commit(const RgbImage& frame, bool accepted) override { tracker_.commit(frame, accepted); }
  void reset(const Pose& pose, std::size_t) override { tracker_.reset(pose); }
  Tracker& tracker() { return tracker_; }

 private:
  Tracker tracker_;
};

/// Returns the ground-truth pose of every frame.
class OracleTracker final : public FrameTracker {
 public:
  explicit OracleTracker(std::vector<Pose> gt) : gt_(std::move(gt)) {}
  std::string name() const override { return "oracle"; }
  void initialize(const RgbImage&, const Pose&, std::size_t) override {}
  TrackResult track(const RgbImage&, std::size_t index) override;
  void reset(const Pose&, std::size_t) override {}
  bool needs_frames() const override { return false; }

 private:
  std::vector<Pose> gt_;
};

/// Always returns the same pose; counts resets.
class FixedPoseTracker final : public FrameTracker {
 public:
  explicit FixedPoseTracker(Pose pose) : pose_(pose) {}
  std::string name() const override { return "fixed"; }
  void initialize(const RgbImage&, const Pose&, std::size_t) override {}
  TrackResult track(const RgbImage&, std::size_t) override;
  void reset(const Pose&, std::size_t) override { ++resets_; }
  bool needs_frames() const override { return false; }
  int resets() const { return resets_; }

 private:
  Pose pose_;
  int resets_ = 0;
};

/// Replays a pose log: line 0 is the initial pose, line k the k-th tracked frame.
class ReplayTracker final : public FrameTracker {
 public:
  explicit ReplayTracker(std::vector<Pose> log) : log_(std::move(log)) {}
  std::string name() const override { return "replay"; }
  void initialize(const RgbImage&, const Pose&, std::size_t) override { cursor_ = 1; }
  TrackResult track(const RgbImage&, std::size_t) override;
  void reset(const Pose&, std::size_t) override {}
  bool needs_frames() const override { return false; }

 private:
  std::vector<Pose> log_;
  std::size_t cursor_ = 1;
};

/// Called after every evaluated frame, before commit and reset.
using FrameObserver = std::function<void(const RgbImage& frame, const FrameRecord& record)>;

/// Evaluates frames 0, S, 2S, ... with the 5cm-5deg criterion. The tracker
/// starts at the ground truth of frame 0; failures reset it to the ground truth.
/// `pose_log`, when given, receives the initial pose and every tracked pose.
RunReport evaluate(const Sequence& sequence, FrameTracker& tracker, const EvalConfig& config,
                   std::vector<Pose>* pose_log = nullptr, const FrameObserver& observer = {});

}  // namespace nlt
