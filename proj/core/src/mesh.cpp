#include "nltrack/mesh.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "nltrack/errors.hpp"

namespace nlt {

namespace {

constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

void fnv1a(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

std::string where(const std::filesystem::path& path, int line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

// Parses the vertex index of an OBJ face token such as "7", "7/2" or "-1//3".
int parse_face_index(std::string_view token, int vertex_count, const std::string& loc) {
  const std::string_view head = token.substr(0, token.find('/'));
  int idx = 0;
  const auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (ec != std::errc{} || ptr != head.data() + head.size() || idx == 0) {
    throw ParseError(loc + "bad face index '" + std::string(token) + "'");
  }
  const int resolved = idx > 0 ? idx - 1 : vertex_count + idx;
  if (resolved < 0 || resolved >= vertex_count) {
    throw ParseError(loc + "face index " + std::to_string(idx) + " out of range");
  }
  return resolved;
}

}  // namespace

void Mesh::validate() const {
  if (empty()) throw DomainError("mesh is empty");
  const int n = static_cast<int>(vertices.size());
  for (const auto& tri : triangles) {
    for (int idx : tri) {
      if (idx < 0 || idx >= n) throw DomainError("mesh triangle index out of range");
    }
  }
  // Greedy tetrahedron of maximal extent: farthest point, farthest from the
  // line, farthest from the plane.
  const Vector3d& a = vertices[0];
  std::size_t ib = 0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if ((vertices[i] - a).squaredNorm() > (vertices[ib] - a).squaredNorm()) ib = i;
  }
  const Vector3d ab = vertices[ib] - a;
  const double scale = ab.norm();
  if (scale <= 0) throw DomainError("mesh vertices are all coincident");
  std::size_t ic = 0;
  double best = -1;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const double d = ab.cross(vertices[i] - a).norm();
    if (d > best) best = d, ic = i;
  }
  const Vector3d normal = ab.cross(vertices[ic] - a);
  if (normal.norm() <= 1e-12 * scale * scale) throw DomainError("mesh vertices are collinear");
  double height = 0;
  for (const auto& v : vertices) height = std::max(height, std::abs(normal.normalized().dot(v - a)));
  if (height <= 1e-9 * scale) throw DomainError("mesh vertices are coplanar");
}

std::uint64_t Mesh::content_hash() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& v : vertices) fnv1a(h, v.data(), sizeof(double) * 3);
  for (const auto& t : triangles) fnv1a(h, t.data(), sizeof(int) * 3);
  return h;
}

BoundingSphere bounding_sphere(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw DomainError("bounding_sphere of empty mesh");
  Vector3d lo = mesh.vertices.front(), hi = lo;
  for (const auto& v : mesh.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  BoundingSphere s;
  s.center = 0.5 * (lo + hi);
  for (const auto& v : mesh.vertices) s.radius = std::max(s.radius, (v - s.center).norm());
  return s;
}

Mesh load_mesh(const std::filesystem::path& path, const ObjOptions& options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh " + path.string());
  Mesh mesh;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vector3d v;
      if (!(ss >> v.x() >> v.y() >> v.z())) throw ParseError(where(path, line_no) + "malformed vertex");
      mesh.vertices.push_back(v * options.scale);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string token;
      const std::string loc = where(path, line_no);
      while (ss >> token) poly.push_back(parse_face_index(token, static_cast<int>(mesh.vertices.size()), loc));
      if (poly.size() < 3) throw ParseError(loc + "face with fewer than 3 vertices");
      if (poly.size() > 3 && options.strict) throw ParseError(loc + "non-triangle face in strict mode");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
    }
  }
  if (mesh.empty()) throw ParseError(path.string() + ": mesh has no vertices or faces");
  mesh.validate();
  return mesh;
}

void save_obj(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  for (const auto& v : mesh.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

Mesh make_box(const Vector3d& size, const Vector3d& center) {
  Mesh m;
  const Vector3d h = 0.5 * size;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back(center + Vector3d((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                                           (i & 4) ? h.z() : -h.z()));
  }
  // Outward counter-clockwise winding.
  m.triangles = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
                 {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  return m;
}

Mesh make_icosphere(double radius, int subdivisions) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  Mesh m;
  m.vertices = {{-1, p, 0}, {1, p, 0}, {-1, -p, 0}, {1, -p, 0}, {0, -1, p}, {0, 1, p},
                {0, -1, -p}, {0, 1, -p}, {p, 0, -1}, {p, 0, 1}, {-p, 0, -1}, {-p, 0, 1}};
  m.triangles = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (auto& v : m.vertices) v.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = midpoints.find(key); it != midpoints.end()) return it->second;
      m.vertices.push_back((m.vertices[a] + m.vertices[b]).normalized());
      const int idx = static_cast<int>(m.vertices.size()) - 1;
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(m.triangles.size() * 4);
    for (const auto& t : m.triangles) {
      const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      refined.push_back({t[0], ab, ca});
      refined.push_back({t[1], bc, ab});
      refined.push_back({t[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    m.triangles = std::move(refined);
  }
  for (auto& v : m.vertices) v *= radius;
  return m;
}

Mesh merge_meshes(std::span<const Mesh> parts) {
  Mesh out;
  for (const auto& part : parts) {
    const int base = static_cast<int>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), part.vertices.begin(), part.vertices.end());
    for (const auto& t : part.triangles) out.triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  return out;
}

Mesh make_builtin_mesh(std::string_view name) {
  if (name == "cube") return make_box(Vector3d::Ones());
  if (name == "sphere") return make_icosphere(0.05, 3);
  if (name == "gadget") {
    const Mesh parts[] = {
        make_box({0.12, 0.045, 0.05}, {0.0, 0.0, 0.0}),          // body
        make_box({0.035, 0.075, 0.04}, {-0.0425, 0.055, 0.0}),   // arm
        make_box({0.03, 0.03, 0.06}, {0.04, -0.005, 0.05}),      // nose
        make_box({0.02, 0.03, 0.02}, {0.045, -0.035, -0.01}),    // foot
    };
    Mesh m = merge_meshes(parts);
    // Recentre on the bounding-box centre so rotations act about the object.
    const Vector3d c = bounding_sphere(m).center;
    for (auto& v : m.vertices) v -= c;
    return m;
  }
  throw DomainError("unknown builtin mesh '" + std::string(name) + "'");
}

}  // namespace nlt
