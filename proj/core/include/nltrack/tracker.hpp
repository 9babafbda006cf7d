#pragma once

#include <memory>
#include <string>

#include "nltrack/mesh.hpp"
#include "nltrack/nonlocal.hpp"
#include "nltrack/segmentation.hpp"

namespace nlt {

enum class TrackMethod { nonlocal, local };

TrackMethod parse_track_method(const std::string& name);
std::string to_string(TrackMethod method);

struct TrackerConfig {
  TrackMethod method = TrackMethod::nonlocal;
  HistogramConfig histograms;
  SearchLineConfig lines;
  NonlocalConfig search;
  AdaptiveThresholds thresholds;  ///< window sizes and theta^T bounds; histories start empty
  int roi_margin = 100;
};

struct TrackResult {
  Pose pose;
  double error = std::numeric_limits<double>::infinity();
  int iterations = 0;
  int inner_invocations = 0;
  bool searched = false;
  Rect roi;
};

/// Frame-to-frame tracker: colour model, search-line field and the local or
/// non-local pose search. Not thread-safe; use one instance per sequence.
class Tracker {
 public:
  Tracker(std::shared_ptr<const Mesh> mesh, std::shared_ptr<const TemplateSet> templates, CameraIntrinsics K,
          TrackerConfig config = {});

  /// Sets the pose and builds the colour model from `frame`.
  void initialize(const RgbImage& frame, const Pose& pose);

  /// Estimates the pose in `frame` starting from the current pose, which it replaces.
  TrackResult track(const RgbImage& frame);

  /// Feeds the last result into the colour model and the adaptive thresholds.
  /// Rejected results leave both untouched.
  void commit(const RgbImage& frame, bool accepted);

  /// Replaces the current pose without touching the colour model.
  void reset(const Pose& pose);

  const Pose& pose() const { return pose_; }
  const AdaptiveThresholds& thresholds() const { return thresholds_; }
  const TrackerConfig& config() const { return config_; }
  bool initialized() const { return initialized_; }
  /// Field of the last tracked frame (null before the first frame or when the ROI was too small).
  const std::shared_ptr<const SearchLineField>& last_field() const { return field_; }

  /// ROI for the next frame: box of the projected contour dilated by the margin, clipped.
  Rect roi_for(const Pose& pose) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::shared_ptr<const TemplateSet> templates_;
  CameraIntrinsics K_;
  TrackerConfig config_;
  ColorHistogramPair histograms_;
  AdaptiveThresholds thresholds_;
  Pose pose_;
  Pose previous_;
  TrackResult last_;
  std::shared_ptr<const SearchLineField> field_;
  bool initialized_ = false;
  bool pending_ = false;
};

}  // namespace nlt
