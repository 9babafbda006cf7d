#include "nltrack/templates.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <queue>

#include "nltrack/errors.hpp"
#include "nltrack/render.hpp"

namespace nlt {

namespace {

constexpr char kMagic[4] = {'N', 'L', 'T', 'T'};
constexpr std::uint32_t kFormatVersion = 1;
static_assert(std::endian::native == std::endian::little, "template files are little-endian");

// Clockwise on screen (y down), starting east.
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

GrayImage largest_component(const GrayImage& mask) {
  Image<int> label(mask.width(), mask.height(), -1);
  int best_label = -1;
  std::size_t best_size = 0;
  int next = 0;
  std::vector<Eigen::Vector2i> stack;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y) || label(x, y) >= 0) continue;
      std::size_t size = 0;
      stack.assign(1, {x, y});
      label(x, y) = next;
      while (!stack.empty()) {
        const Eigen::Vector2i p = stack.back();
        stack.pop_back();
        ++size;
        for (int k = 0; k < 8; ++k) {
          const int nx = p.x() + kDx[k], ny = p.y() + kDy[k];
          if (mask.contains(nx, ny) && mask(nx, ny) && label(nx, ny) < 0) {
            label(nx, ny) = next;
            stack.push_back({nx, ny});
          }
        }
      }
      if (size > best_size) best_size = size, best_label = next;
      ++next;
    }
  }
  GrayImage out(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) out(x, y) = label(x, y) == best_label && best_label >= 0;
  }
  return out;
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw ParseError("truncated template file");
  return v;
}

void put_vec(std::ostream& out, const Vector3d& v) { out.write(reinterpret_cast<const char*>(v.data()), 24); }

Vector3d get_vec(std::istream& in) {
  Vector3d v;
  if (!in.read(reinterpret_cast<char*>(v.data()), 24)) throw ParseError("truncated template file");
  return v;
}

}  // namespace

std::size_t TemplateSet::nearest_index(const Pose& pose) const {
  const Vector3d axis = pose.R.transpose() * Vector3d::UnitZ();
  std::size_t best = 0;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < views.size(); ++i) {
    const double d = views[i].view_dir.dot(axis);
    if (d > best_dot) best_dot = d, best = i;
  }
  return best;
}

std::vector<Vector3d> fibonacci_sphere(int n) {
  std::vector<Vector3d> dirs;
  dirs.reserve(n);
  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * i + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * i;
    dirs.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
  }
  return dirs;
}

std::vector<Eigen::Vector2i> trace_outer_contour(const GrayImage& mask) {
  const GrayImage comp = largest_component(mask);
  auto inside = [&](int x, int y) { return comp.contains(x, y) && comp(x, y); };

  Eigen::Vector2i start(-1, -1);
  for (int y = 0; y < comp.height() && start.x() < 0; ++y) {
    for (int x = 0; x < comp.width(); ++x) {
      if (comp(x, y)) {
        start = {x, y};
        break;
      }
    }
  }
  if (start.x() < 0) return {};

  // The first pixel in raster order has background to its W, NW, N and NE.
  auto next_from = [&](const Eigen::Vector2i& p, int search, int& dir) {
    for (int i = 0; i < 8; ++i) {
      const int k = (search + i) % 8;
      if (inside(p.x() + kDx[k], p.y() + kDy[k])) {
        dir = k;
        return true;
      }
    }
    return false;
  };

  std::vector<Eigen::Vector2i> contour{start};
  int first_dir = -1;
  if (!next_from(start, 4, first_dir)) return contour;  // isolated pixel

  Eigen::Vector2i p = start;
  int dir = first_dir;
  const std::size_t limit = 4 * static_cast<std::size_t>(comp.width() + 2) * (comp.height() + 2);
  while (contour.size() < limit) {
    p += Eigen::Vector2i(kDx[dir], kDy[dir]);
    // Resume the sweep at the background pixel that preceded `dir`.
    const int search = (dir % 2 == 0) ? (dir + 6) % 8 : (dir + 5) % 8;
    int next_dir = -1;
    next_from(p, search, next_dir);
    if (p == start && next_dir == first_dir) break;  // Jacob's stopping criterion
    contour.push_back(p);
    dir = next_dir;
  }
  return contour;
}

Pose template_view_pose(const Vector3d& view_dir, const BoundingSphere& sphere, double distance) {
  Pose pose;
  pose.R = minimal_rotation(view_dir, Vector3d::UnitZ());
  pose.t = Vector3d(0, 0, distance) - pose.R * sphere.center;
  return pose;
}

std::uint64_t template_cache_key(const Mesh& mesh, const CameraIntrinsics& K, const TemplateBuildOptions& options) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const auto& v) {
    const auto* p = reinterpret_cast<const unsigned char*>(&v);
    for (std::size_t i = 0; i < sizeof(v); ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  mix(kFormatVersion);
  mix(mesh.content_hash());
  mix(K.fx);
  mix(K.fy);
  mix(K.width);
  mix(K.height);
  mix(options.view_count);
  mix(options.points_per_view);
  mix(options.fill_ratio);
  mix(options.seed);
  return h;
}

TemplateSet build_templates(const Mesh& mesh, const CameraIntrinsics& K, const TemplateBuildOptions& options) {
  mesh.validate();
  K.validate();
  if (options.view_count < 1 || options.points_per_view < 1) {
    throw DomainError("template view_count and points_per_view must be positive");
  }
  const int side = std::min(K.width, K.height);
  const double f = 0.5 * (K.fx + K.fy);
  const CameraIntrinsics Kt{f, f, 0.5 * (side - 1), 0.5 * (side - 1), side, side};
  const BoundingSphere sphere = bounding_sphere(mesh);
  const double distance = std::max(2.0 * f * sphere.radius / (options.fill_ratio * side), 2.0 * sphere.radius);

  TemplateSet set;
  set.meta = {mesh.content_hash(), options.seed, template_cache_key(mesh, K, options)};
  for (const Vector3d& dir : fibonacci_sphere(options.view_count)) {
    const Pose pose = template_view_pose(dir, sphere, distance);
    const SilhouetteRender render = rasterize_silhouette(mesh, Kt, pose, side, side);
    const std::vector<Eigen::Vector2i> contour = trace_outer_contour(render.mask);

    TemplateView view;
    view.view_dir = dir;
    const int n = static_cast<int>(contour.size());
    if (n == 0) {
      view.short_count = true;
      set.views.push_back(std::move(view));
      continue;
    }

    std::vector<double> cumulative(n + 1, 0.0);
    double signed_area = 0;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector2i& a = contour[i];
      const Eigen::Vector2i& b = contour[(i + 1) % n];
      cumulative[i + 1] = cumulative[i] + (b - a).cast<double>().norm();
      signed_area += 0.5 * (static_cast<double>(a.x()) * b.y() - static_cast<double>(b.x()) * a.y());
    }

    std::vector<int> picks;
    if (n < options.points_per_view) {
      view.short_count = true;
      for (int i = 0; i < n; ++i) picks.push_back(i);
    } else {
      const double total = cumulative[n];
      for (int s = 0; s < options.points_per_view; ++s) {
        const double target = total * s / options.points_per_view;
        const auto it = std::lower_bound(cumulative.begin(), cumulative.begin() + n, target);
        picks.push_back(static_cast<int>(it - cumulative.begin()));
      }
    }

    const int span = n >= 7 ? 3 : 1;
    const Matrix3d Rt = pose.R.transpose();
    for (int idx : picks) {
      const Eigen::Vector2i& p = contour[idx];
      const Vector2d tangent = (contour[(idx + span) % n] - contour[(idx - span + n) % n]).cast<double>();
      Vector2d normal = signed_area > 0 ? Vector2d(tangent.y(), -tangent.x()) : Vector2d(-tangent.y(), tangent.x());
      if (normal.norm() < 1e-9) normal = Vector2d(1, 0);
      normal.normalize();

      const double z = render.depth(p.x(), p.y());
      const Vector3d pc((p.x() - Kt.cx) * z / Kt.fx, (p.y() - Kt.cy) * z / Kt.fy, z);
      view.contour_points.push_back(Rt * (pc - pose.t));
      view.surface_normals.push_back((Rt * Vector3d(normal.x(), normal.y(), 0.0)).normalized());
    }
    set.views.push_back(std::move(view));
  }
  return set;
}

void write_templates(std::ostream& out, const TemplateSet& set) {
  out.write(kMagic, 4);
  put(out, kFormatVersion);
  put(out, set.meta.mesh_hash);
  put(out, set.meta.seed);
  put(out, set.meta.cache_key);
  put(out, static_cast<std::uint32_t>(set.views.size()));
  for (const auto& v : set.views) {
    put_vec(out, v.view_dir);
    put(out, static_cast<std::uint8_t>(v.short_count));
    put(out, static_cast<std::uint32_t>(v.contour_points.size()));
    for (const auto& p : v.contour_points) put_vec(out, p);
    for (const auto& n : v.surface_normals) put_vec(out, n);
  }
  if (!out) throw IoError("failed writing template data");
}

TemplateSet read_templates(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("not a template file");
  if (get<std::uint32_t>(in) != kFormatVersion) throw ParseError("unsupported template file version");
  TemplateSet set;
  set.meta.mesh_hash = get<std::uint64_t>(in);
  set.meta.seed = get<std::uint64_t>(in);
  set.meta.cache_key = get<std::uint64_t>(in);
  const auto count = get<std::uint32_t>(in);
  set.views.resize(count);
  for (auto& v : set.views) {
    v.view_dir = get_vec(in);
    v.short_count = get<std::uint8_t>(in) != 0;
    const auto n = get<std::uint32_t>(in);
    v.contour_points.resize(n);
    v.surface_normals.resize(n);
    for (auto& p : v.contour_points) p = get_vec(in);
    for (auto& nrm : v.surface_normals) nrm = get_vec(in);
  }
  return set;
}

void save_templates(const std::filesystem::path& path, const TemplateSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_templates(out, set);
}

TemplateSet load_templates(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_templates(in);
}

TemplateSet load_or_build_templates(const std::filesystem::path& cache_dir, const Mesh& mesh,
                                    const CameraIntrinsics& K, const TemplateBuildOptions& options) {
  const std::uint64_t key = template_cache_key(mesh, K, options);
  std::ostringstream name;
  name << "templates_" << std::hex << key << ".nltt";
  const std::filesystem::path path = cache_dir / name.str();
  if (std::filesystem::exists(path)) {
    try {
      TemplateSet cached = load_templates(path);
      if (cached.meta.cache_key == key) return cached;
    } catch (const ParseError&) {
      // Stale or corrupt cache entries are rebuilt below.
    }
  }
  TemplateSet set = build_templates(mesh, K, options);
  std::filesystem::create_directories(cache_dir);
  save_templates(path, set);
  return set;
}

std::vector<ProjectedContourPoint> project_contour(const TemplateView& view, const Pose& pose,
                                                   const CameraIntrinsics& K) {
  std::vector<ProjectedContourPoint> out(view.contour_points.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Vector3d pc = pose * view.contour_points[i];
    if (pc.z() <= 1e-6) continue;
    const Vector2d px(K.fx * pc.x() / pc.z() + K.cx, K.fy * pc.y() / pc.z() + K.cy);
    if (!K.in_image(px)) continue;
    const Vector3d n3 = pose.R * view.surface_normals[i];
    const Vector2d n2(n3.x(), n3.y());
    const double len = n2.norm();
    if (len < 1e-6) continue;
    out[i] = {px, n2 / len, true};
  }
  return out;
}

}  // namespace nlt
