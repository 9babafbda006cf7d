#include "nltrack/render.hpp"

#include <cmath>
#include <limits>

#include "nltrack/errors.hpp"

namespace nlt {

int SilhouetteRender::area() const {
  int n = 0;
  for (auto m : mask.pixels()) n += m != 0;
  return n;
}

Rect SilhouetteRender::bounding_box() const {
  int x0 = mask.width(), y0 = mask.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height(); ++y) {
    const auto row = mask.row(y);
    for (int x = 0; x < mask.width(); ++x) {
      if (!row[x]) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) return {};
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

namespace {

inline double edge(const Vector2d& a, const Vector2d& b, double px, double py) {
  return (b.x() - a.x()) * (py - a.y()) - (b.y() - a.y()) * (px - a.x());
}

}  // namespace

SilhouetteRender rasterize_silhouette(const Mesh& mesh, const CameraIntrinsics& K, const Pose& pose,
                                      int width, int height) {
  if (mesh.empty()) throw DomainError("cannot rasterise an empty mesh");
  constexpr float kInf = std::numeric_limits<float>::infinity();
  SilhouetteRender out{GrayImage(width, height, 0), FloatImage(width, height, kInf), Image<int>(width, height, -1)};

  std::vector<Vector3d> cam(mesh.vertices.size());
  std::vector<Vector2d> px(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    cam[i] = pose * mesh.vertices[i];
    if (cam[i].z() > 1e-6) px[i] = {K.fx * cam[i].x() / cam[i].z() + K.cx, K.fy * cam[i].y() / cam[i].z() + K.cy};
  }

  bool any_in_front = false;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    if (cam[tri[0]].z() <= 1e-6 || cam[tri[1]].z() <= 1e-6 || cam[tri[2]].z() <= 1e-6) continue;
    any_in_front = true;
    const Vector2d &a = px[tri[0]], &b = px[tri[1]], &c = px[tri[2]];
    const double area2 = edge(a, b, c.x(), c.y());
    if (std::abs(area2) < 1e-12) continue;
    const double inv_area = 1.0 / area2;
    const double iz0 = 1.0 / cam[tri[0]].z(), iz1 = 1.0 / cam[tri[1]].z(), iz2 = 1.0 / cam[tri[2]].z();

    const int xmin = std::max(0, static_cast<int>(std::ceil(std::min({a.x(), b.x(), c.x()}))));
    const int xmax = std::min(width - 1, static_cast<int>(std::floor(std::max({a.x(), b.x(), c.x()}))));
    const int ymin = std::max(0, static_cast<int>(std::ceil(std::min({a.y(), b.y(), c.y()}))));
    const int ymax = std::min(height - 1, static_cast<int>(std::floor(std::max({a.y(), b.y(), c.y()}))));
    for (int y = ymin; y <= ymax; ++y) {
      for (int x = xmin; x <= xmax; ++x) {
        // Barycentric weights; all share the sign of area2 inside the closed triangle.
        const double w0 = edge(b, c, x, y) * inv_area;
        const double w1 = edge(c, a, x, y) * inv_area;
        const double w2 = edge(a, b, x, y) * inv_area;
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        const float z = static_cast<float>(1.0 / (w0 * iz0 + w1 * iz1 + w2 * iz2));
        if (z < out.depth(x, y)) {
          out.depth(x, y) = z;
          out.mask(x, y) = 1;
          out.triangle(x, y) = static_cast<int>(t);
        }
      }
    }
  }
  if (!any_in_front) throw EmptyRenderError("object lies entirely behind the camera");
  return out;
}

}  // namespace nlt
