#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "nltrack/geometry.hpp"
#include "nltrack/searchlines.hpp"
#include "nltrack/templates.hpp"

namespace nlt {

/// A contour point matched to a candidate on a precomputed search line.
struct Correspondence {
  int point_index = 0;
  LineRef line;
  Vector2d pixel = Vector2d::Zero();   ///< projection at assembly time
  Vector2d normal = Vector2d::UnitX(); ///< search-line direction
  Vector2d origin = Vector2d::Zero();  ///< search-line origin
  double d = 0;                        ///< candidate position along the line
  double weight = 0;
  Vector3d model_point = Vector3d::Zero();
};

struct OptimizerConfig {
  double alpha = 0.125;        ///< robust exponent of the IRLS cost
  double error_alpha = 0.75;   ///< exponent used for the matching error E'
  int max_iters = 30;
  int view_refresh_every = 3;
  double step_eps = 1e-4;
  double psi_guard = 0.5;      ///< residual floor for the IRLS weight (pixels)
  /// Steps are scaled down to at most this rotation (rad) and this fraction
  /// of the current camera distance in translation. 0 disables a limit.
  double max_rotation_step = 0.35;
  double max_translation_step = 0.2;

  /// Throws DomainError on out-of-range values.
  void validate() const;
};

struct LocalResult {
  Pose pose;
  double error = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool stopped_early = false;  ///< ended by the step observer
};

/// Signed distance along the line between the projection of X and the candidate.
/// Throws BehindCameraError.
double residual(const Correspondence& c, const Pose& pose, const CameraIntrinsics& K);

/// 1x6 derivative of the residual w.r.t. a left twist applied to `pose`.
Eigen::Matrix<double, 1, 6> residual_jacobian(const Correspondence& c, const Pose& pose, const CameraIntrinsics& K);

inline double irls_weight(double F, double alpha, double guard = 0.5) {
  return std::pow(std::max(std::abs(F), guard), alpha - 2.0);
}

/// Matches the projected contour of `view` under `pose` against the field.
/// Points that are invalid, outside the ROI or on empty lines are skipped.
std::vector<Correspondence> assemble_correspondences(const TemplateView& view, const Pose& pose,
                                                     const SearchLineField& field, const CameraIntrinsics& K);

/// One IRLS Gauss-Newton step. Throws StepFailure with fewer than 6 weighted
/// correspondences or a singular (even after damping) normal matrix.
Twist gauss_newton_step(std::span<const Correspondence> correspondences, const Pose& pose,
                        const CameraIntrinsics& K, double alpha, double psi_guard = 0.5);

/// Uniformly scales `step` so that both limits of `config` hold.
Twist limit_step(const Twist& step, const Pose& pose, const OptimizerConfig& config);

/// Called after every accepted step with the poses before and after it.
/// Returning false ends the optimisation.
using StepObserver = std::function<bool(const Pose& before, const Pose& after)>;

LocalResult local_updates(const Pose& pose0, const SearchLineField& field, const TemplateSet& templates,
                          const CameraIntrinsics& K, const OptimizerConfig& config = {},
                          const StepObserver& observer = {});

/// E' = sum(w |F|^alpha) / N'. Infinite when N' = 0.
double matching_error(std::span<const Correspondence> correspondences, const Pose& pose,
                      const CameraIntrinsics& K, double alpha);
double matching_error(const Pose& pose, const SearchLineField& field, const TemplateSet& templates,
                      const CameraIntrinsics& K, double alpha);

}  // namespace nlt
