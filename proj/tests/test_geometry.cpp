#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <numbers>

#include "nltrack/errors.hpp"
#include "nltrack/geometry.hpp"
#include "support/random.hpp"

using namespace nlt;
using nlt::testing::deg;
using nlt::testing::Gen;

namespace {

constexpr double kPi = std::numbers::pi;

using Matrix4d = Eigen::Matrix4d;

// Matrix exponential of the 4x4 twist hat by scaling and squaring of a Taylor series.
Matrix4d expm_oracle(const Twist& xi) {
  Matrix4d A = Matrix4d::Zero();
  A.topLeftCorner<3, 3>() << 0, -xi[2], xi[1], xi[2], 0, -xi[0], -xi[1], xi[0], 0;
  A.topRightCorner<3, 1>() = xi.tail<3>();
  int squarings = 0;
  while (A.cwiseAbs().maxCoeff() > 0.05) {
    A /= 2.0;
    ++squarings;
  }
  Matrix4d term = Matrix4d::Identity(), sum = Matrix4d::Identity();
  for (int k = 1; k < 30; ++k) {
    term = term * A / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

Matrix4d to_matrix(const Pose& p) {
  Matrix4d M = Matrix4d::Identity();
  M.topLeftCorner<3, 3>() = p.R;
  M.topRightCorner<3, 1>() = p.t;
  return M;
}

CameraIntrinsics camera() {
  CameraIntrinsics K;
  K.fx = K.fy = 500;
  K.cx = 320;
  K.cy = 240;
  K.width = 640;
  K.height = 480;
  return K;
}

}  // namespace

TEST(SE3Exp, ZeroIsIdentity) {
  const Pose p = se3_exp(Twist::Zero());
  EXPECT_TRUE(p.R.isIdentity(0));
  EXPECT_TRUE(p.t.isZero(0));
}

TEST(SE3Exp, QuarterTurnMatchesSeriesExponential) {
  Twist xi;
  xi << 0, 0, kPi / 2, 0.3, -0.2, 0.1;
  const Matrix4d expected = expm_oracle(xi);
  EXPECT_TRUE(to_matrix(se3_exp(xi)).isApprox(expected, 1e-12));
  EXPECT_NEAR(se3_exp(xi).R(0, 1), -1.0, 1e-12);
}

TEST(SE3Exp, PureTranslation) {
  Twist xi;
  xi << 0, 0, 0, 0.1, 0, 0;
  const Pose p = se3_exp(xi);
  EXPECT_TRUE(p.R.isIdentity(0));
  EXPECT_EQ(p.t, Vector3d(0.1, 0, 0));
}

TEST(SE3Exp, MatchesSeriesOracleOnRandomTwists) {
  Gen gen(11);
  for (int k = 0; k < 500; ++k) {
    const Twist xi = gen.twist(3.0, 2.0);
    const Matrix4d diff = to_matrix(se3_exp(xi)) - expm_oracle(xi);
    ASSERT_LT(diff.cwiseAbs().maxCoeff(), 1e-10) << xi.transpose();
  }
}

TEST(SE3Log, IdentityIsZero) { EXPECT_TRUE(se3_log(Pose::identity()).isZero(0)); }

TEST(SE3Log, QuarterTurn) {
  Twist xi;
  xi << 0, 0, kPi / 2, 0.05, 0.4, -0.3;
  Pose p;
  const Matrix4d M = expm_oracle(xi);
  p.R = M.topLeftCorner<3, 3>();
  p.t = M.topRightCorner<3, 1>();
  EXPECT_TRUE(se3_log(p).isApprox(xi, 1e-10));
}

TEST(SE3Log, RoundTripProperty) {
  Gen gen(12);
  for (int k = 0; k < 10000; ++k) {
    const Twist xi = gen.twist(kPi - 1e-3, 3.0);
    const Twist back = se3_log(se3_exp(xi));
    ASSERT_LT((back - xi).cwiseAbs().maxCoeff(), 1e-9) << xi.transpose();
  }
}

TEST(SE3Log, ExpOfLogReproducesPose) {
  Gen gen(13);
  for (int k = 0; k < 1000; ++k) {
    Pose p{gen.rotation(3.0), Vector3d(gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(0, 3))};
    const Pose q = se3_exp(se3_log(p));
    ASSERT_LT((to_matrix(p) - to_matrix(q)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SE3Log, HalfTurnThrows) {
  Pose p;
  p.R = so3_exp(Vector3d(kPi, 0, 0));
  EXPECT_THROW(se3_log(p), DomainError);
}

TEST(Project, OpticalAxisHitsPrincipalPoint) {
  EXPECT_EQ(project(camera(), Pose::identity(), Vector3d(0, 0, 1)), Vector2d(320, 240));
}

TEST(Project, OffAxisPoint) {
  EXPECT_NEAR((project(camera(), Pose::identity(), Vector3d(0.1, 0, 1)) - Vector2d(370, 240)).norm(), 0, 1e-12);
}

TEST(Project, BehindCameraThrows) {
  EXPECT_THROW(project(camera(), Pose::identity(), Vector3d(0, 0, -1)), BehindCameraError);
  EXPECT_THROW(project(camera(), Pose::identity(), Vector3d(0, 0, 0)), BehindCameraError);
}

TEST(Project, JacobianMatchesCentralDifferences) {
  Gen gen(14);
  CameraIntrinsics K = camera();
  for (int k = 0; k < 1000; ++k) {
    K.fx = gen.uniform(200, 1500);
    K.fy = gen.uniform(200, 1500);
    const Vector3d pc(gen.uniform(-1, 1), gen.uniform(-1, 1), gen.uniform(0.2, 4));
    const auto J = project_jacobian(K, pc);
    Eigen::Matrix<double, 2, 3> fd;
    for (int c = 0; c < 3; ++c) {
      Vector3d h = Vector3d::Zero();
      h[c] = 1e-6;
      fd.col(c) = (project_camera_point(K, pc + h) - project_camera_point(K, pc - h)) / 2e-6;
    }
    ASSERT_LT((J - fd).norm() / J.norm(), 1e-4);
  }
}

TEST(DecomposeRotation, Identity) {
  const auto s = decompose_rotation(Matrix3d::Identity());
  EXPECT_TRUE(s.in_plane.isIdentity(1e-12));
  EXPECT_TRUE(s.out_of_plane.isIdentity(1e-12));
}

TEST(DecomposeRotation, PureInPlane) {
  const Matrix3d R = so3_exp(Vector3d(0, 0, deg(30)));
  const auto s = decompose_rotation(R);
  EXPECT_TRUE(s.in_plane.isApprox(R, 1e-12));
  EXPECT_TRUE(s.out_of_plane.isIdentity(1e-12));
}

TEST(DecomposeRotation, RecomposesRandomRotations) {
  Gen gen(15);
  for (int k = 0; k < 10000; ++k) {
    const Matrix3d R = gen.rotation(3.0);
    const Vector3d v = R.transpose() * Vector3d::UnitZ();
    if (v.z() < -1 + 1e-6) continue;
    const auto s = decompose_rotation(R);
    ASSERT_LT((s.in_plane * s.out_of_plane - R).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_LT((s.out_of_plane * v - Vector3d::UnitZ()).norm(), 1e-9);
    ASSERT_LT((s.in_plane * Vector3d::UnitZ() - Vector3d::UnitZ()).norm(), 1e-9);
  }
}

TEST(DecomposeRotation, ViewFromBehindThrows) {
  EXPECT_THROW(decompose_rotation(so3_exp(Vector3d(kPi, 0, 0))), DegenerateError);
}

TEST(MinimalRotation, AxisIsPerpendicularToBothVectors) {
  Gen gen(16);
  for (int k = 0; k < 1000; ++k) {
    const Vector3d a = gen.unit(), b = gen.unit();
    if (a.dot(b) < -1 + 1e-6) continue;
    const Matrix3d R = minimal_rotation(a, b);
    ASSERT_LT((R * a - b).norm(), 1e-9);
    const Vector3d axis = se3_log({R, Vector3d::Zero()}).head<3>();
    if (axis.norm() > 1e-6) {
      ASSERT_LT(std::abs(axis.normalized().dot(a)), 1e-9);
    }
    ASSERT_NEAR(axis.norm(), std::acos(std::clamp(a.dot(b), -1.0, 1.0)), 1e-7);
  }
}

TEST(ThetaChart, ViewAxisIsOrigin) {
  const auto t = theta_from_direction(Vector3d::UnitZ());
  EXPECT_EQ(t.theta_x, 0);
  EXPECT_EQ(t.theta_y, 0);
}

TEST(ThetaChart, ElevationInXOZ) {
  const auto t = theta_from_direction(Vector3d(std::sin(kPi / 4), 0, std::cos(kPi / 4)));
  EXPECT_NEAR(t.theta_x, kPi / 4, 1e-15);
  EXPECT_EQ(t.theta_y, 0);
}

TEST(ThetaChart, DirectionRoundTrip) {
  Gen gen(17);
  for (int k = 0; k < 10000; ++k) {
    const Vector3d v = gen.front_unit(1e-3);
    const auto t = theta_from_direction(v);
    ASSERT_LT((direction_from_theta(t) - v).norm(), 1e-12);
  }
}

TEST(ThetaChart, ThetaRoundTrip) {
  Gen gen(18);
  for (int k = 0; k < 10000; ++k) {
    const OutOfPlaneParam t{gen.uniform(-1.55, 1.55), gen.uniform(-1.55, 1.55)};
    const auto back = theta_from_direction(direction_from_theta(t));
    ASSERT_NEAR(back.theta_x, t.theta_x, 1e-12);
    ASSERT_NEAR(back.theta_y, t.theta_y, 1e-12);
  }
}

TEST(ThetaChart, RejectsBackHemisphere) {
  EXPECT_THROW(theta_from_direction(Vector3d(1, 0, 0)), DomainError);
  EXPECT_THROW(theta_from_direction(Vector3d(0, 0.2, -1).normalized()), DomainError);
  EXPECT_THROW(direction_from_theta({kPi / 2, 0}), DomainError);
}

TEST(PoseErrors, Zero) {
  const Matrix3d R = so3_exp(Vector3d(0.3, 0.1, -0.2));
  EXPECT_EQ(rotation_error(R, R), 0.0);
  EXPECT_EQ(translation_error(Vector3d(1, 2, 3), Vector3d(1, 2, 3)), 0.0);
}

TEST(PoseErrors, FiveDegreesAboutAnyAxis) {
  Gen gen(19);
  for (int k = 0; k < 100; ++k) {
    const Matrix3d Ra = gen.rotation();
    const Matrix3d Rb = Ra * so3_exp(gen.unit() * deg(5));
    ASSERT_NEAR(rotation_error(Ra, Rb), deg(5), 1e-9);
  }
}

TEST(PoseErrors, FiveCentimetres) {
  EXPECT_DOUBLE_EQ(translation_error(Vector3d::Zero(), Vector3d(0.03, 0.04, 0)), 0.05);
}

TEST(PoseErrors, ClampedForNearlyIdenticalRotations) {
  const Matrix3d R = so3_exp(Vector3d(1e-9, 0, 0));
  EXPECT_FALSE(std::isnan(rotation_error(R, Matrix3d::Identity())));
  EXPECT_NEAR(rotation_error(so3_exp(Vector3d(kPi, 0, 0)), Matrix3d::Identity()), kPi, 1e-7);
}

TEST(Orthonormalize, ProjectsToRotation) {
  Gen gen(20);
  for (int k = 0; k < 100; ++k) {
    const Matrix3d R = gen.rotation();
    Matrix3d noisy = R;
    for (int i = 0; i < 9; ++i) noisy.data()[i] += gen.normal(1e-4);
    const Pose p{orthonormalize(noisy), Vector3d::Zero()};
    ASSERT_TRUE(p.is_valid(1e-12));
    ASSERT_LT(rotation_error(p.R, R), 1e-3);
  }
}
