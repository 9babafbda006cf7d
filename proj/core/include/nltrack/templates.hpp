#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "nltrack/geometry.hpp"
#include "nltrack/image.hpp"
#include "nltrack/mesh.hpp"

namespace nlt {

/// One pre-rendered viewpoint: contour samples and their outward normals, both
/// in the model frame. `view_dir` is the camera optical axis in the model frame.
struct TemplateView {
  Vector3d view_dir = Vector3d::UnitZ();
  std::vector<Vector3d> contour_points;
  std::vector<Vector3d> surface_normals;
  /// Set when the silhouette had fewer boundary pixels than requested.
  bool short_count = false;

  friend bool operator==(const TemplateView&, const TemplateView&) = default;
};

struct TemplateBuildOptions {
  int view_count = 3000;
  int points_per_view = 200;
  /// Fraction of the smaller template-image side covered by the bounding-sphere diameter.
  double fill_ratio = 0.6;
  /// Recorded in the set metadata; view sampling itself is a deterministic lattice.
  std::uint64_t seed = 0;
};

struct TemplateSetMeta {
  std::uint64_t mesh_hash = 0;
  std::uint64_t seed = 0;
  std::uint64_t cache_key = 0;
  friend bool operator==(const TemplateSetMeta&, const TemplateSetMeta&) = default;
};

struct TemplateSet {
  std::vector<TemplateView> views;
  TemplateSetMeta meta;

  /// Index of argmax_v dot(view_dir_v, R^T z); ties resolve to the lowest index.
  std::size_t nearest_index(const Pose& pose) const;
  const TemplateView& nearest_view(const Pose& pose) const { return views[nearest_index(pose)]; }

  friend bool operator==(const TemplateSet&, const TemplateSet&) = default;
};

/// `n` unit vectors on a Fibonacci sphere lattice (deterministic).
std::vector<Vector3d> fibonacci_sphere(int n);

/// Outer boundary of the largest 8-connected component of `mask`, traced
/// clockwise (on screen) with Moore-neighbour tracing. Holes are ignored.
std::vector<Eigen::Vector2i> trace_outer_contour(const GrayImage& mask);

/// Camera pose that looks at the bounding-sphere centre along `view_dir`
/// from `distance` metres away.
Pose template_view_pose(const Vector3d& view_dir, const BoundingSphere& sphere, double distance);

/// Renders the mesh from `view_count` lattice directions and samples
/// `points_per_view` contour points at equal arc-length per view. The template
/// camera is square with side min(K.width, K.height) and focal (fx + fy) / 2.
TemplateSet build_templates(const Mesh& mesh, const CameraIntrinsics& K, const TemplateBuildOptions& options = {});

/// Key identifying a template build (mesh content, camera, options).
std::uint64_t template_cache_key(const Mesh& mesh, const CameraIntrinsics& K, const TemplateBuildOptions& options);

/// Binary template file; see docs/template_format.md.
void write_templates(std::ostream& out, const TemplateSet& set);
TemplateSet read_templates(std::istream& in);
void save_templates(const std::filesystem::path& path, const TemplateSet& set);
TemplateSet load_templates(const std::filesystem::path& path);

/// Loads `<cache_dir>/templates_<key>.nltt` when its key matches, otherwise
/// builds and writes it.
TemplateSet load_or_build_templates(const std::filesystem::path& cache_dir, const Mesh& mesh,
                                    const CameraIntrinsics& K, const TemplateBuildOptions& options = {});

struct ProjectedContourPoint {
  Vector2d pixel = Vector2d::Zero();
  Vector2d normal = Vector2d::Zero();  ///< unit image-plane normal (outward)
  bool valid = false;
};

/// Projects a template's contour under `pose`. Points behind the camera,
/// outside the image, or whose rotated normal is parallel to the optical axis
/// are flagged invalid.
std::vector<ProjectedContourPoint> project_contour(const TemplateView& view, const Pose& pose,
                                                   const CameraIntrinsics& K);

}  // namespace nlt
