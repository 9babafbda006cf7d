#include <gtest/gtest.h>

#include "nltrack/errors.hpp"
#include "nltrack/local_optimizer.hpp"
#include "support/random.hpp"
#include "support/scene.hpp"

using namespace nlt;
using namespace nlt::testing;

namespace {

// Correspondences consistent with `truth`: random model points near the origin,
// random line directions, candidates placed on the true projections.
std::vector<Correspondence> synthetic_correspondences(Gen& gen, const Pose& truth, const CameraIntrinsics& K,
                                                      int count) {
  std::vector<Correspondence> out;
  for (int i = 0; i < count; ++i) {
    Correspondence c;
    c.point_index = i;
    c.model_point = Vector3d(gen.uniform(-0.05, 0.05), gen.uniform(-0.05, 0.05), gen.uniform(-0.05, 0.05));
    const double a = gen.uniform(0, 2 * std::numbers::pi);
    c.normal = Vector2d(std::cos(a), std::sin(a));
    c.origin = Vector2d(gen.uniform(0, 640), gen.uniform(0, 480));
    c.d = c.normal.dot(project(K, truth, c.model_point) - c.origin);
    c.weight = gen.uniform(0.2, 1.0);
    out.push_back(c);
  }
  return out;
}

Pose random_front_pose(Gen& gen) {
  Pose p;
  p.R = gen.rotation();
  p.t = Vector3d(gen.uniform(-0.1, 0.1), gen.uniform(-0.1, 0.1), gen.uniform(0.4, 1.0));
  return p;
}

const Scene& scene() {
  static const Scene s = make_scene();
  return s;
}

SearchLineField scene_field(const Pose& rendered) {
  const Scene& s = scene();
  return build_field(silhouette_probability(*s.mesh, s.K, rendered, centred_roi(s.K, s.gt, 240)));
}

}  // namespace

TEST(Residual, Example) {
  Correspondence c;
  c.model_point = Vector3d(0.1, 0, 0);
  c.normal = Vector2d(1, 0);
  c.origin = Vector2d(100, 200);
  c.d = 5;
  Pose pose;
  pose.t = Vector3d(0, 0, 1);
  EXPECT_NEAR(residual(c, pose, vga_camera()), 264.5, 1e-9);
  c.normal = Vector2d(0, -1);
  EXPECT_NEAR(residual(c, pose, vga_camera()), -239.5 + 200 - 5, 1e-9);
}

TEST(Residual, BehindCameraThrows) {
  Correspondence c;
  Pose pose;
  pose.t = Vector3d(0, 0, -1);
  EXPECT_THROW(residual(c, pose, vga_camera()), BehindCameraError);
}

TEST(Residual, JacobianMatchesFiniteDifferences) {
  Gen gen(61);
  const CameraIntrinsics K = vga_camera();
  for (int trial = 0; trial < 1000; ++trial) {
    const Pose pose = random_front_pose(gen);
    auto corr = synthetic_correspondences(gen, pose, K, 1);
    const auto J = residual_jacobian(corr[0], pose, K);
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
      const Twist e = Twist::Unit(i) * h;
      const double fd = (residual(corr[0], apply_left(e, pose), K) - residual(corr[0], apply_left(-e, pose), K)) / (2 * h);
      ASSERT_NEAR(J(i), fd, 1e-4 * std::max(1.0, std::abs(fd))) << "trial " << trial << " coord " << i;
    }
  }
}

TEST(IrlsWeight, Values) {
  EXPECT_NEAR(irls_weight(4, 0.125), std::pow(4.0, -1.875), 1e-12);
  EXPECT_NEAR(irls_weight(4, 0.125), 0.0743, 1e-4);
  EXPECT_DOUBLE_EQ(irls_weight(-7.3, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(irls_weight(1.0, 0.125), 1.0);
  EXPECT_DOUBLE_EQ(irls_weight(-1.0, 0.75), 1.0);
  EXPECT_DOUBLE_EQ(irls_weight(0.0, 0.125), std::pow(0.5, -1.875));
}

TEST(GaussNewton, ZeroResidualGivesZeroStep) {
  Gen gen(62);
  const CameraIntrinsics K = vga_camera();
  for (int trial = 0; trial < 50; ++trial) {
    const Pose pose = random_front_pose(gen);
    const auto corr = synthetic_correspondences(gen, pose, K, 40);
    EXPECT_LT(gauss_newton_step(corr, pose, K, 0.125).norm(), 1e-9);
  }
}

TEST(GaussNewton, RecoversTranslationOffset) {
  Gen gen(63);
  const CameraIntrinsics K = vga_camera();
  for (int trial = 0; trial < 100; ++trial) {
    const Pose truth = random_front_pose(gen);
    const auto corr = synthetic_correspondences(gen, truth, K, 60);
    Pose start = truth;
    start.t += gen.unit() * 0.005;
    const Pose next = apply_left(gauss_newton_step(corr, start, K, 2.0), start);
    ASSERT_LT(translation_error(next.t, truth.t), 0.1 * translation_error(start.t, truth.t)) << trial;
  }
}

TEST(GaussNewton, DecreasesWeightedSurrogate) {
  Gen gen(64);
  const CameraIntrinsics K = vga_camera();
  for (int trial = 0; trial < 100; ++trial) {
    const Pose truth = random_front_pose(gen);
    auto corr = synthetic_correspondences(gen, truth, K, 50);
    for (auto& c : corr) c.d += gen.normal(0.5);
    const Pose start = apply_left(gen.twist(deg(1), 0.003), truth);
    const double alpha = 0.75;
    const Pose next = apply_left(gauss_newton_step(corr, start, K, alpha), start);
    double before = 0, after = 0;
    for (const auto& c : corr) {
      const double F0 = residual(c, start, K);
      const double w = c.weight * irls_weight(F0, alpha);
      before += w * F0 * F0;
      after += w * std::pow(residual(c, next, K), 2);
    }
    ASSERT_LE(after, before * (1 + 1e-9)) << trial;
  }
}

TEST(GaussNewton, NeedsSixCorrespondences) {
  Gen gen(65);
  const CameraIntrinsics K = vga_camera();
  const Pose pose = random_front_pose(gen);
  auto corr = synthetic_correspondences(gen, pose, K, 5);
  EXPECT_THROW(gauss_newton_step(corr, pose, K, 0.125), StepFailure);
  auto more = synthetic_correspondences(gen, pose, K, 10);
  for (auto& c : more) c.weight = 0;
  corr.insert(corr.end(), more.begin(), more.end());
  EXPECT_THROW(gauss_newton_step(corr, pose, K, 0.125), StepFailure);
}

TEST(MatchingError, Cases) {
  Gen gen(66);
  const CameraIntrinsics K = vga_camera();
  const Pose pose = random_front_pose(gen);
  auto corr = synthetic_correspondences(gen, pose, K, 20);
  EXPECT_NEAR(matching_error(corr, pose, K, 0.75), 0.0, 1e-9);

  std::vector<Correspondence> one(corr.begin(), corr.begin() + 1);
  one[0].weight = 1;
  one[0].d -= 1;
  EXPECT_NEAR(matching_error(one, pose, K, 0.75), 1.0, 1e-9);

  for (auto& c : corr) c.d += gen.normal(2.0);
  const double e = matching_error(corr, pose, K, 0.75);
  auto doubled = corr;
  doubled.insert(doubled.end(), corr.begin(), corr.end());
  EXPECT_NEAR(matching_error(doubled, pose, K, 0.75), e, 1e-12);

  // Adding as many exact matches halves N' relative to the sum.
  auto padded = corr;
  for (auto c : corr) {
    c.d = c.normal.dot(project(K, pose, c.model_point) - c.origin);
    padded.push_back(c);
  }
  EXPECT_NEAR(matching_error(corr, pose, K, 0.75), 2 * matching_error(padded, pose, K, 0.75), 1e-9);

  EXPECT_TRUE(std::isinf(matching_error(std::span<const Correspondence>{}, pose, K, 0.75)));
}

TEST(LimitStep, ScalesUniformly) {
  OptimizerConfig cfg;
  Pose pose;
  pose.t = Vector3d(0, 0, 0.5);
  Twist big;
  big << 0.7, 0, 0, 0, 0, 0.01;
  const Twist r = limit_step(big, pose, cfg);
  EXPECT_NEAR(r.head<3>().norm(), 0.35, 1e-12);
  EXPECT_NEAR(r(5), 0.005, 1e-12);

  Twist far;
  far << 0, 0, 0.01, 0.3, 0, 0;
  const Twist s = limit_step(far, pose, cfg);
  EXPECT_NEAR(s(3), 0.1, 1e-12);
  EXPECT_NEAR(s(2), 0.01 / 3, 1e-12);

  Twist small;
  small << 0.01, 0.02, 0, 0.01, 0, 0;
  EXPECT_EQ(limit_step(small, pose, cfg), small);

  cfg.max_rotation_step = 0;
  cfg.max_translation_step = 0;
  EXPECT_EQ(limit_step(big, pose, cfg), big);
}

TEST(LocalUpdates, EmptyFieldKeepsPose) {
  const Scene& s = scene();
  ProbabilityMap flat{centred_roi(s.K, s.gt, 200), FloatImage(200, 200, 0.5f)};
  const SearchLineField field = build_field(flat);
  const LocalResult r = local_updates(s.gt, field, *s.templates, s.K);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_TRUE(std::isinf(r.error));
  EXPECT_EQ(r.pose.R, s.gt.R);
  EXPECT_EQ(r.pose.t, s.gt.t);
}

TEST(LocalUpdates, StaysAtGroundTruth) {
  const Scene& s = scene();
  const SearchLineField field = scene_field(s.gt);
  OptimizerConfig cfg;
  cfg.step_eps = 1e-3;
  const LocalResult r = local_updates(s.gt, field, *s.templates, s.K, cfg);
  EXPECT_LE(r.iterations, 3);
  EXPECT_LT(rotation_error(r.pose.R, s.gt.R), deg(1));
  EXPECT_LT(translation_error(r.pose.t, s.gt.t), 0.003);
  EXPECT_LT(r.error, 1.0);
}

TEST(LocalUpdates, ConvergesFromSmallPerturbations) {
  const Scene& s = scene();
  const SearchLineField field = scene_field(s.gt);
  Gen gen(67);
  int converged = 0;
  const int trials = 10;
  for (int trial = 0; trial < trials; ++trial) {
    const Pose start = apply_left(gen.twist(deg(4), 0.01), s.gt);
    const LocalResult r = local_updates(start, field, *s.templates, s.K);
    converged += rotation_error(r.pose.R, s.gt.R) < deg(2) && translation_error(r.pose.t, s.gt.t) < 0.005;
  }
  EXPECT_GE(converged, 9);
}

TEST(LocalUpdates, ObserverStopsEarly) {
  const Scene& s = scene();
  const SearchLineField field = scene_field(s.gt);
  const Pose start = apply_left((Twist() << 0.03, 0, 0, 0.005, 0, 0).finished(), s.gt);
  int calls = 0;
  const LocalResult r = local_updates(start, field, *s.templates, s.K, {}, [&](const Pose&, const Pose&) {
    ++calls;
    return false;
  });
  EXPECT_EQ(calls, 1);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_TRUE(r.stopped_early);
}

TEST(LocalUpdates, AssembledCorrespondencesLieOnTheirLines) {
  const Scene& s = scene();
  const SearchLineField field = scene_field(s.gt);
  const auto corr = assemble_correspondences(s.templates->nearest_view(s.gt), s.gt, field, s.K);
  ASSERT_GT(corr.size(), 50u);
  for (const auto& c : corr) {
    const SearchLine line = field.line(c.line);
    EXPECT_EQ(c.normal, line.dir);
    EXPECT_LE(std::abs(field.direction(c.line.direction).perp.dot(c.pixel - c.origin)), 0.5 + 1e-9);
    EXPECT_GT(c.weight, 0);
  }
}

TEST(OptimizerConfig, Validation) {
  OptimizerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.alpha = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.error_alpha = 2.5;
  EXPECT_THROW(cfg.validate(), DomainError);
}
