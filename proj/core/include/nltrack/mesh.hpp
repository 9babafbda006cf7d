#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "nltrack/geometry.hpp"

namespace nlt {

/// Triangle mesh in the model frame (metres).
struct Mesh {
  std::vector<Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return vertices.empty() || triangles.empty(); }

  /// Throws DomainError on out-of-range indices, an empty mesh, or fewer
  /// than four non-coplanar vertices.
  void validate() const;

  /// FNV-1a over the raw vertex and index data; stable across runs.
  std::uint64_t content_hash() const;
};

struct BoundingSphere {
  Vector3d center = Vector3d::Zero();
  double radius = 0;
};

/// Sphere centred on the axis-aligned bounding box, enclosing every vertex.
BoundingSphere bounding_sphere(const Mesh& mesh);

struct ObjOptions {
  /// Reject polygons with more than three vertices instead of fan-triangulating them.
  bool strict = false;
  /// Multiplier applied to every coordinate (e.g. 0.001 for millimetre files).
  double scale = 1.0;
};

/// Reads a Wavefront OBJ file. Only `v` and `f` records are interpreted.
Mesh load_mesh(const std::filesystem::path& path, const ObjOptions& options = {});
void save_obj(const std::filesystem::path& path, const Mesh& mesh);

Mesh make_box(const Vector3d& size, const Vector3d& center = Vector3d::Zero());
Mesh make_icosphere(double radius, int subdivisions);
Mesh merge_meshes(std::span<const Mesh> parts);

/// Procedural meshes addressable by name: "cube" (1 m edge), "sphere",
/// "gadget" (an asymmetric union of boxes, ~12 cm across).
/// Throws DomainError for unknown names.
Mesh make_builtin_mesh(std::string_view name);

}  // namespace nlt
