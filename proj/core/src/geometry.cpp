#include "nltrack/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "nltrack/errors.hpp"

namespace nlt {

namespace {

Vector3d vee(const Matrix3d& A) {
  return {A(2, 1) - A(1, 2), A(0, 2) - A(2, 0), A(1, 0) - A(0, 1)};
}

}  // namespace

bool Pose::is_valid(double tol) const {
  if (!R.allFinite() || !t.allFinite()) return false;
  if (((R.transpose() * R) - Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw DomainError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw DomainError("camera image size must be positive");
  if (!(cx >= 0 && cx < width && cy >= 0 && cy < height)) {
    throw DomainError("principal point lies outside the image");
  }
}

Matrix3d skew(const Vector3d& v) {
  Matrix3d S;
  S << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return S;
}

Matrix3d so3_exp(const Vector3d& omega) {
  const double theta2 = omega.squaredNorm();
  const Matrix3d W = skew(omega);
  double a, b;
  if (theta2 < 1e-10) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Matrix3d::Identity() + a * W + b * W * W;
}

Pose se3_exp(const Twist& xi) {
  const Vector3d omega = xi.head<3>();
  const Vector3d v = xi.tail<3>();
  const double theta2 = omega.squaredNorm();
  const Matrix3d W = skew(omega);
  double b, c;
  if (theta2 < 1e-10) {
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double theta = std::sqrt(theta2);
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Matrix3d V = Matrix3d::Identity() + b * W + c * W * W;
  return {so3_exp(omega), V * v};
}

Twist se3_log(const Pose& p) {
  const Vector3d axis_sin = 0.5 * vee(p.R);
  const double cos_theta = std::clamp(0.5 * (p.R.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(axis_sin.norm(), cos_theta);
  if (theta >= std::numbers::pi - 1e-6) {
    throw DomainError("se3_log: rotation angle too close to pi");
  }
  Vector3d omega;
  double d;  // coefficient of W^2 in V^-1
  const double t2 = theta * theta;
  omega = (theta < 1e-5 ? 1.0 + t2 / 6.0 : theta / std::sin(theta)) * axis_sin;
  if (theta < 1e-2) {
    d = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    const double half_sin = std::sin(0.5 * theta);
    d = (1.0 - theta * std::sin(theta) / (4.0 * half_sin * half_sin)) / t2;
  }
  const Matrix3d W = skew(omega);
  const Matrix3d V_inv = Matrix3d::Identity() - 0.5 * W + d * W * W;
  Twist xi;
  xi.head<3>() = omega;
  xi.tail<3>() = V_inv * p.t;
  return xi;
}

Vector2d project_camera_point(const CameraIntrinsics& K, const Vector3d& pc) {
  if (!(pc.z() > 1e-6)) throw BehindCameraError("point is behind the camera");
  return {K.fx * pc.x() / pc.z() + K.cx, K.fy * pc.y() / pc.z() + K.cy};
}

Vector2d project(const CameraIntrinsics& K, const Pose& pose, const Vector3d& X) {
  return project_camera_point(K, pose * X);
}

Eigen::Matrix<double, 2, 3> project_jacobian(const CameraIntrinsics& K, const Vector3d& pc) {
  const double iz = 1.0 / pc.z();
  Eigen::Matrix<double, 2, 3> J;
  J << K.fx * iz, 0, -K.fx * pc.x() * iz * iz, 0, K.fy * iz, -K.fy * pc.y() * iz * iz;
  return J;
}

Matrix3d minimal_rotation(const Vector3d& from, const Vector3d& to) {
  const Vector3d a = from.normalized();
  const Vector3d b = to.normalized();
  const Vector3d axis = a.cross(b);
  const double s = axis.norm();
  const double c = a.dot(b);
  if (s < 1e-12) {
    if (c > 0) return Matrix3d::Identity();
    throw DegenerateError("minimal rotation between antiparallel vectors is not unique");
  }
  return so3_exp(axis / s * std::atan2(s, c));
}

RotationSplit decompose_rotation(const Matrix3d& R) {
  const Vector3d z = Vector3d::UnitZ();
  const Vector3d v = R.transpose() * z;
  if (v.z() <= -1.0 + 1e-12) {
    throw DegenerateError("decompose_rotation: object viewed from exactly behind");
  }
  RotationSplit split;
  split.out_of_plane = minimal_rotation(v, z);
  split.in_plane = R * split.out_of_plane.transpose();
  return split;
}

OutOfPlaneParam theta_from_direction(const Vector3d& v) {
  if (!(v.z() > 0)) throw DomainError("theta_from_direction: v_z must be positive");
  return {std::atan2(v.x(), v.z()), std::atan2(v.y(), v.z())};
}

Vector3d direction_from_theta(const OutOfPlaneParam& theta) {
  constexpr double half_pi = std::numbers::pi / 2;
  if (!(std::abs(theta.theta_x) < half_pi) || !(std::abs(theta.theta_y) < half_pi)) {
    throw DomainError("direction_from_theta: angles must lie in (-pi/2, pi/2)");
  }
  return Vector3d(std::tan(theta.theta_x), std::tan(theta.theta_y), 1.0).normalized();
}

double rotation_error(const Matrix3d& Ra, const Matrix3d& Rb) {
  // atan2 form keeps precision near 0 and pi; equals arccos((tr - 1) / 2).
  const Matrix3d D = Ra.transpose() * Rb;
  const double s = 0.5 * vee(D).norm();
  const double c = std::clamp(0.5 * (D.trace() - 1.0), -1.0, 1.0);
  return std::clamp(std::atan2(s, c), 0.0, std::numbers::pi);
}

double translation_error(const Vector3d& ta, const Vector3d& tb) { return (ta - tb).norm(); }

Matrix3d orthonormalize(const Matrix3d& R) {
  Eigen::JacobiSVD<Matrix3d> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3d U = svd.matrixU();
  const Matrix3d V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0) U.col(2) *= -1;
  return U * V.transpose();
}

}  // namespace nlt
