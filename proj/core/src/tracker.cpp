#include "nltrack/tracker.hpp"

#include <cmath>

#include "nltrack/errors.hpp"
#include "nltrack/render.hpp"

namespace nlt {

TrackMethod parse_track_method(const std::string& name) {
  if (name == "nonlocal") return TrackMethod::nonlocal;
  if (name == "local") return TrackMethod::local;
  throw ParseError("unknown tracker method '" + name + "'");
}

std::string to_string(TrackMethod method) { return method == TrackMethod::local ? "local" : "nonlocal"; }

Tracker::Tracker(std::shared_ptr<const Mesh> mesh, std::shared_ptr<const TemplateSet> templates, CameraIntrinsics K,
                 TrackerConfig config)
    : mesh_(std::move(mesh)), templates_(std::move(templates)), K_(K), config_(std::move(config)) {
  if (!mesh_ || mesh_->empty()) throw DomainError("tracker needs a non-empty mesh");
  if (!templates_ || templates_->views.empty()) throw DomainError("tracker needs a non-empty template set");
  K_.validate();
  config_.search.local.validate();
  config_.search.inner.validate();
}

void Tracker::initialize(const RgbImage& frame, const Pose& pose) {
  const auto silhouette = rasterize_silhouette(*mesh_, K_, pose, frame.width(), frame.height());
  histograms_ = init_histograms(frame, silhouette, config_.histograms);
  thresholds_ = config_.thresholds;
  thresholds_.error_history.clear();
  thresholds_.disp_history.clear();
  thresholds_.e_T = std::numeric_limits<double>::infinity();
  thresholds_.theta_T = thresholds_.theta_default;
  field_.reset();
  pose_ = previous_ = pose;
  pending_ = false;
  initialized_ = true;
}

Rect Tracker::roi_for(const Pose& pose) const {
  const Rect frame{0, 0, K_.width, K_.height};
  int x0 = K_.width, y0 = K_.height, x1 = -1, y1 = -1;
  for (const auto& p : project_contour(templates_->nearest_view(pose), pose, K_)) {
    if (!p.valid) continue;
    const int x = static_cast<int>(std::lround(p.pixel.x()));
    const int y = static_cast<int>(std::lround(p.pixel.y()));
    x0 = std::min(x0, x), y0 = std::min(y0, y), x1 = std::max(x1, x), y1 = std::max(y1, y);
  }
  if (x1 < x0) return {};
  return Rect{x0, y0, x1 - x0 + 1, y1 - y0 + 1}.dilated(config_.roi_margin).intersect(frame);
}

TrackResult Tracker::track(const RgbImage& frame) {
  if (!initialized_) throw Error("tracker used before initialize()");
  TrackResult result;
  result.pose = pose_;
  result.roi = roi_for(pose_);
  previous_ = pose_;
  pending_ = true;
  field_.reset();
  if (result.roi.width < 16 || result.roi.height < 16) {
    last_ = result;
    return result;
  }

  const ProbabilityMap prob = probability_map(histograms_, frame, result.roi);
  auto built = std::make_shared<SearchLineField>(build_field(prob, config_.lines));
  field_ = built;
  const SearchLineField& field = *built;

  if (config_.method == TrackMethod::nonlocal) {
    const auto r = track_nonlocal(pose_, field, *templates_, K_, config_.search, thresholds_.e_T, thresholds_.theta_T);
    result.pose = r.pose;
    result.error = r.error;
    result.iterations = r.iterations;
    result.inner_invocations = r.inner_invocations;
    result.searched = r.searched;
  } else {
    const auto a = local_updates(pose_, field, *templates_, K_, config_.search.local);
    const auto b = local_updates(a.pose, field, *templates_, K_, config_.search.local);
    result.pose = b.pose;
    result.error = b.error;
    result.iterations = a.iterations + b.iterations;
  }
  result.pose.R = orthonormalize(result.pose.R);
  pose_ = result.pose;
  last_ = result;
  return result;
}

void Tracker::commit(const RgbImage& frame, bool accepted) {
  if (!pending_) return;
  pending_ = false;
  if (!accepted) return;
  thresholds_ = adapt_thresholds(thresholds_, last_.error, rotation_error(previous_.R, last_.pose.R));
  try {
    const auto silhouette = rasterize_silhouette(*mesh_, K_, last_.pose, frame.width(), frame.height());
    if (silhouette.area() > 0) histograms_ = update_histograms(histograms_, frame, silhouette, config_.histograms);
  } catch (const Error&) {
    // keep the previous colour model when the object left the view
  }
}

void Tracker::reset(const Pose& pose) {
  pose_ = previous_ = pose;
  pending_ = false;
}

}  // namespace nlt
