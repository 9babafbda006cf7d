#include "nltrack/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "nltrack/errors.hpp"
#include "nltrack/render.hpp"

namespace nlt {

namespace {

std::uint8_t to_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0l, 255l)); }

Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vector3d v;
  do {
    v = Vector3d(n(rng), n(rng), n(rng));
  } while (v.norm() < 1e-9);
  return v.normalized();
}

Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  return q.normalized().toRotationMatrix();
}

RgbImage make_background(const SynthSpec& spec, std::mt19937_64& rng) {
  RgbImage bg(spec.width, spec.height, spec.background_color);
  switch (spec.background) {
    case BackgroundMode::solid:
      break;
    case BackgroundMode::noise: {
      std::uniform_int_distribution<int> u(0, 255);
      for (auto& px : bg.pixels()) px = {static_cast<std::uint8_t>(u(rng)), static_cast<std::uint8_t>(u(rng)),
                                          static_cast<std::uint8_t>(u(rng))};
      break;
    }
    case BackgroundMode::texture: {
      if (!spec.texture.empty()) {
        const RgbImage tex = read_png(spec.texture);
        if (tex.empty()) throw DomainError("empty background texture");
        for (int y = 0; y < bg.height(); ++y) {
          for (int x = 0; x < bg.width(); ++x) bg(x, y) = tex(x % tex.width(), y % tex.height());
        }
        break;
      }
      std::uniform_int_distribution<int> u(0, 255);
      std::uniform_int_distribution<int> ux(0, spec.width - 1), uy(0, spec.height - 1), us(8, 80);
      for (int k = 0; k < 300; ++k) {
        const Rgb8 c{static_cast<std::uint8_t>(u(rng)), static_cast<std::uint8_t>(u(rng)),
                     static_cast<std::uint8_t>(u(rng))};
        const int x0 = ux(rng), y0 = uy(rng), w = us(rng), h = us(rng);
        for (int y = y0; y < std::min(y0 + h, spec.height); ++y) {
          for (int x = x0; x < std::min(x0 + w, spec.width); ++x) bg(x, y) = c;
        }
      }
      break;
    }
  }
  return bg;
}

bool inside_frame(const Mesh& mesh, const CameraIntrinsics& K, const Pose& pose, int margin) {
  for (const auto& v : mesh.vertices) {
    const Vector3d p = pose * v;
    if (p.z() <= 1e-3) return false;
    const Vector2d x = project_camera_point(K, p);
    if (x.x() < margin || x.y() < margin || x.x() > K.width - 1 - margin || x.y() > K.height - 1 - margin) return false;
  }
  return true;
}

}  // namespace

BackgroundMode parse_background(const std::string& name) {
  if (name == "solid") return BackgroundMode::solid;
  if (name == "noise") return BackgroundMode::noise;
  if (name == "texture") return BackgroundMode::texture;
  throw ParseError("unknown background mode '" + name + "'");
}

std::string to_string(BackgroundMode mode) {
  switch (mode) {
    case BackgroundMode::solid: return "solid";
    case BackgroundMode::noise: return "noise";
    case BackgroundMode::texture: return "texture";
  }
  return "solid";
}

void SynthSpec::validate() const {
  if (frames < 2) throw DomainError("synthetic sequence needs at least 2 frames");
  if (width < 32 || height < 32) throw DomainError("synthetic image too small");
  if (!(focal > 0) || !(depth > 0)) throw DomainError("focal length and depth must be positive");
  if (!(rotation_deg >= 0 && rotation_deg < 180)) throw DomainError("rotation_deg must lie in [0, 180)");
  if (!(translation >= 0)) throw DomainError("translation must be >= 0");
  if (!(color_jitter >= 0) || !(pixel_noise >= 0)) throw DomainError("noise levels must be >= 0");
}

CameraIntrinsics synth_camera(const SynthSpec& spec) {
  CameraIntrinsics K;
  K.fx = K.fy = spec.focal;
  K.cx = 0.5 * (spec.width - 1);
  K.cy = 0.5 * (spec.height - 1);
  K.width = spec.width;
  K.height = spec.height;
  return K;
}

RgbImage render_shaded(const Mesh& mesh, const CameraIntrinsics& K, const Pose& pose, const RgbImage& background,
                       Rgb8 color) {
  const SilhouetteRender sil = rasterize_silhouette(mesh, K, pose, background.width(), background.height());
  const Vector3d light = Vector3d(-0.3, -0.5, -1.0).normalized();  // towards the light, camera frame
  std::vector<double> shade(mesh.triangles.size());
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const auto& tri = mesh.triangles[f];
    const Vector3d a = pose * mesh.vertices[tri[0]];
    const Vector3d b = pose * mesh.vertices[tri[1]];
    const Vector3d c = pose * mesh.vertices[tri[2]];
    Vector3d n = (b - a).cross(c - a);
    if (n.norm() < 1e-15) {
      shade[f] = 0.3;
      continue;
    }
    n.normalize();
    if (n.dot(a) > 0) n = -n;
    shade[f] = 0.3 + 0.7 * std::max(0.0, n.dot(light));
  }
  RgbImage out = background;
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const int f = sil.triangle(x, y);
      if (f < 0) continue;
      const double s = shade[f];
      out(x, y) = {to_u8(color.r * s), to_u8(color.g * s), to_u8(color.b * s)};
    }
  }
  return out;
}

Sequence synth_sequence(const SynthSpec& spec, const Mesh& mesh) {
  spec.validate();
  mesh.validate();
  std::mt19937_64 rng(spec.seed);
  const CameraIntrinsics K = synth_camera(spec);
  const RgbImage background = make_background(spec, rng);

  Sequence seq;
  seq.name = spec.name;
  seq.K = K;

  Pose pose;
  for (int attempt = 0;; ++attempt) {
    pose = {random_rotation(rng), Vector3d(0, 0, spec.depth)};
    if (inside_frame(mesh, K, pose, spec.border_margin)) break;
    if (attempt > 100) throw DomainError("object does not fit in the frame at the requested depth");
  }

  const double angle = spec.rotation_deg * std::numbers::pi / 180.0;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int i = 0; i < spec.frames; ++i) {
    if (i > 0) {
      bool placed = false;
      for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
        Vector3d axis = random_unit(rng);
        if (spec.out_of_plane_only) {
          const Vector3d view = pose.t.normalized();
          axis = (axis - axis.dot(view) * view).normalized();
        }
        Pose next{so3_exp(angle * axis) * pose.R, pose.t + spec.translation * random_unit(rng)};
        // keep the object near its starting depth and away from the image border
        if (std::abs(next.t.z() - spec.depth) > 0.25 * spec.depth) continue;
        if (!inside_frame(mesh, K, next, spec.border_margin)) continue;
        pose = next;
        placed = true;
      }
      if (!placed) throw DomainError("synthetic motion leaves the frame at frame " + std::to_string(i));
    }
    Rgb8 color = spec.object_color;
    color.r = to_u8(color.r * (1 + spec.color_jitter * unit(rng)));
    color.g = to_u8(color.g * (1 + spec.color_jitter * unit(rng)));
    color.b = to_u8(color.b * (1 + spec.color_jitter * unit(rng)));
    RgbImage frame = render_shaded(mesh, K, pose, background, color);
    if (spec.pixel_noise > 0) {
      for (auto& px : frame.pixels()) {
        px.r = to_u8(px.r + spec.pixel_noise * noise(rng));
        px.g = to_u8(px.g + spec.pixel_noise * noise(rng));
        px.b = to_u8(px.b + spec.pixel_noise * noise(rng));
      }
    }
    seq.frames.push_back(std::move(frame));
    seq.gt_poses.push_back(pose);
  }
  return seq;
}

}  // namespace nlt
