#include "nltrack/local_optimizer.hpp"

#include <cmath>

#include "nltrack/errors.hpp"

namespace nlt {

void OptimizerConfig::validate() const {
  if (!(alpha > 0 && alpha <= 2)) throw DomainError("alpha must lie in (0, 2]");
  if (!(error_alpha > 0 && error_alpha <= 2)) throw DomainError("error_alpha must lie in (0, 2]");
  if (max_iters < 1) throw DomainError("max_iters must be >= 1");
  if (view_refresh_every < 1) throw DomainError("view_refresh_every must be >= 1");
  if (!(step_eps >= 0)) throw DomainError("step_eps must be >= 0");
  if (!(psi_guard > 0)) throw DomainError("psi_guard must be > 0");
  if (!(max_rotation_step >= 0) || !(max_translation_step >= 0)) throw DomainError("step limits must be >= 0");
}

double residual(const Correspondence& c, const Pose& pose, const CameraIntrinsics& K) {
  const Vector2d x = project(K, pose, c.model_point);
  return c.normal.dot(x - c.origin) - c.d;
}

// F = n^T (pi(exp(dxi) P) - o) - d with P = R X + t. A left twist moves P by
// w x P + v, so dP/dxi = [-[P]x | I] and dF/dxi = n^T dpi/dP [-[P]x | I].
Eigen::Matrix<double, 1, 6> residual_jacobian(const Correspondence& c, const Pose& pose, const CameraIntrinsics& K) {
  const Vector3d P = pose * c.model_point;
  const Eigen::Matrix<double, 1, 3> g = c.normal.transpose() * project_jacobian(K, P);
  Eigen::Matrix<double, 1, 6> J;
  J.head<3>() = P.cross(g.transpose()).transpose();  // g * -[P]x
  J.tail<3>() = g;
  return J;
}

std::vector<Correspondence> assemble_correspondences(const TemplateView& view, const Pose& pose,
                                                     const SearchLineField& field, const CameraIntrinsics& K) {
  std::vector<Correspondence> out;
  const auto projected = project_contour(view, pose, K);
  out.reserve(projected.size());
  for (std::size_t i = 0; i < projected.size(); ++i) {
    const auto& p = projected[i];
    if (!p.valid || !field.contains(p.pixel)) continue;
    const LineRef ref = field.line_for(p.pixel, p.normal);
    const SearchLine line = field.line(ref);
    const double s = line.dir.dot(p.pixel - line.origin);
    const auto cand = closest_candidate(line.candidates, s);
    if (!cand) continue;
    Correspondence c;
    c.point_index = static_cast<int>(i);
    c.line = ref;
    c.pixel = p.pixel;
    c.normal = line.dir;
    c.origin = line.origin;
    c.d = cand->d;
    c.weight = cand->weight;
    c.model_point = view.contour_points[i];
    out.push_back(c);
  }
  return out;
}

Twist gauss_newton_step(std::span<const Correspondence> correspondences, const Pose& pose,
                        const CameraIntrinsics& K, double alpha, double psi_guard) {
  Matrix6d H = Matrix6d::Zero();
  Vector6d g = Vector6d::Zero();
  int weighted = 0;
  for (const auto& c : correspondences) {
    if (!(c.weight > 0)) continue;
    const Vector3d P = pose * c.model_point;
    if (P.z() <= 1e-6) continue;
    const double F = residual(c, pose, K);
    const auto J = residual_jacobian(c, pose, K);
    const double w = c.weight * irls_weight(F, alpha, psi_guard);
    H.noalias() += w * J.transpose() * J;
    g.noalias() += w * F * J.transpose();
    ++weighted;
  }
  if (weighted < 6) throw StepFailure("fewer than 6 weighted correspondences");

  Eigen::LDLT<Matrix6d> ldlt(H);
  constexpr double kMinRcond = 1e-12;
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > kMinRcond)) {
    const double trace = H.trace();
    if (!(trace > 0) || !std::isfinite(trace)) throw StepFailure("degenerate normal matrix");
    H.diagonal().array() += 1e-6 * trace / 6.0;
    ldlt.compute(H);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > kMinRcond)) throw StepFailure("singular normal matrix");
  }
  const Twist step = -ldlt.solve(g);
  if (!step.allFinite()) throw StepFailure("non-finite step");
  return step;
}

double matching_error(std::span<const Correspondence> correspondences, const Pose& pose,
                      const CameraIntrinsics& K, double alpha) {
  double sum = 0;
  int n = 0;
  for (const auto& c : correspondences) {
    const Vector3d P = pose * c.model_point;
    if (P.z() <= 1e-6) continue;
    sum += c.weight * std::pow(std::abs(residual(c, pose, K)), alpha);
    ++n;
  }
  return n == 0 ? std::numeric_limits<double>::infinity() : sum / n;
}

double matching_error(const Pose& pose, const SearchLineField& field, const TemplateSet& templates,
                      const CameraIntrinsics& K, double alpha) {
  if (templates.views.empty()) return std::numeric_limits<double>::infinity();
  const auto corr = assemble_correspondences(templates.nearest_view(pose), pose, field, K);
  return matching_error(corr, pose, K, alpha);
}

Twist limit_step(const Twist& step, const Pose& pose, const OptimizerConfig& config) {
  double scale = 1.0;
  const double rot = step.head<3>().norm();
  const double trans = step.tail<3>().norm();
  if (config.max_rotation_step > 0 && rot > config.max_rotation_step) scale = config.max_rotation_step / rot;
  const double max_trans = config.max_translation_step * pose.t.norm();
  if (config.max_translation_step > 0 && max_trans > 0 && trans * scale > max_trans) scale = max_trans / trans;
  return step * scale;
}

LocalResult local_updates(const Pose& pose0, const SearchLineField& field, const TemplateSet& templates,
                          const CameraIntrinsics& K, const OptimizerConfig& config, const StepObserver& observer) {
  config.validate();
  LocalResult result;
  result.pose = pose0;
  if (templates.views.empty()) return result;

  Pose pose = pose0;
  const TemplateView* view = nullptr;
  for (int it = 0; it < config.max_iters; ++it) {
    if (it % config.view_refresh_every == 0) view = &templates.nearest_view(pose);
    const auto corr = assemble_correspondences(*view, pose, field, K);
    if (corr.empty()) {
      if (it == 0) return result;
      break;
    }
    Twist step;
    try {
      step = limit_step(gauss_newton_step(corr, pose, K, config.alpha, config.psi_guard), pose, config);
    } catch (const StepFailure&) {
      break;
    }
    const Pose next = apply_left(step, pose);
    ++result.iterations;
    const bool keep_going = !observer || observer(pose, next);
    pose = next;
    if (!keep_going) {
      result.stopped_early = true;
      break;
    }
    if (step.norm() < config.step_eps) break;
  }
  result.pose = pose;
  result.error = matching_error(pose, field, templates, K, config.error_alpha);
  return result;
}

}  // namespace nlt
