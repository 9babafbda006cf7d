#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nlt {

using Vector2d = Eigen::Vector2d;
using Vector3d = Eigen::Vector3d;
using Matrix3d = Eigen::Matrix3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// se(3) tangent vector. Layout: rotation (rad) in [0,3), translation (m) in [3,6).
using Twist = Vector6d;

/// Rigid transform mapping model coordinates into the camera frame: x_c = R x_m + t.
struct Pose {
  Matrix3d R = Matrix3d::Identity();
  Vector3d t = Vector3d::Zero();

  static Pose identity() { return {}; }

  Vector3d operator*(const Vector3d& x) const { return R * x + t; }
  Pose operator*(const Pose& rhs) const { return {R * rhs.R, R * rhs.t + t}; }
  Pose inverse() const { return {R.transpose(), -(R.transpose() * t)}; }

  /// True when R is orthonormal with det +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

/// Pinhole intrinsics. Pixel centres sit at integer coordinates.
struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  /// Throws DomainError unless fx, fy > 0 and the principal point lies inside the image.
  void validate() const;
  bool in_image(const Vector2d& px) const {
    return px.x() > -0.5 && px.y() > -0.5 && px.x() < width - 0.5 && px.y() < height - 0.5;
  }
};

/// Elevation angles of a view direction projected on the XOZ and YOZ planes.
struct OutOfPlaneParam {
  double theta_x = 0;
  double theta_y = 0;
};

Matrix3d skew(const Vector3d& v);

Matrix3d so3_exp(const Vector3d& omega);

/// Closed-form SE(3) exponential (Rodrigues rotation, V-matrix translation).
Pose se3_exp(const Twist& xi);

/// Inverse of se3_exp. Throws DomainError when the rotation angle is >= pi - 1e-6.
Twist se3_log(const Pose& p);

/// Left-multiplicative update used by the optimizer: exp(delta) * pose.
inline Pose apply_left(const Twist& delta, const Pose& pose) { return se3_exp(delta) * pose; }

/// Projects a camera-frame point. Throws BehindCameraError when Z <= 1e-6.
Vector2d project_camera_point(const CameraIntrinsics& K, const Vector3d& pc);

/// Projects a model point under `pose` (pi(K (R X + t))).
Vector2d project(const CameraIntrinsics& K, const Pose& pose, const Vector3d& X);

/// d(pixel)/d(camera point), evaluated at camera-frame point pc.
Eigen::Matrix<double, 2, 3> project_jacobian(const CameraIntrinsics& K, const Vector3d& pc);

/// Minimal-angle rotation taking unit vector `from` onto unit vector `to`.
/// Throws DegenerateError when the vectors are antiparallel.
Matrix3d minimal_rotation(const Vector3d& from, const Vector3d& to);

struct RotationSplit {
  Matrix3d in_plane;      ///< rotation about the optical axis
  Matrix3d out_of_plane;  ///< maps v = R^T z onto z
};

/// R = in_plane * out_of_plane, with out_of_plane the minimal rotation taking
/// v = R^T z to z. Throws DegenerateError when v is antiparallel to z.
RotationSplit decompose_rotation(const Matrix3d& R);

/// Throws DomainError when v_z <= 0.
OutOfPlaneParam theta_from_direction(const Vector3d& v);
/// Unit vector with the given elevation angles. Throws DomainError outside (-pi/2, pi/2)^2.
Vector3d direction_from_theta(const OutOfPlaneParam& theta);

/// Geodesic angle between two rotations, in [0, pi].
double rotation_error(const Matrix3d& Ra, const Matrix3d& Rb);
double translation_error(const Vector3d& ta, const Vector3d& tb);

/// Re-orthonormalises a nearly orthonormal matrix (SVD projection).
Matrix3d orthonormalize(const Matrix3d& R);

}  // namespace nlt
