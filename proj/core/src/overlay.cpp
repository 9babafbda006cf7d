#include "nltrack/overlay.hpp"

#include <cmath>

#include "nltrack/local_optimizer.hpp"

namespace nlt {

Rgb8 residual_color(double residual, double max_residual) {
  const double t = std::clamp(std::abs(residual) / max_residual, 0.0, 1.0);
  const auto c = [](double v) { return static_cast<std::uint8_t>(std::lround(255 * std::clamp(v, 0.0, 1.0))); };
  return {c(2 * t), c(2 * (1 - t)), 0};
}

RgbImage draw_overlay(const RgbImage& frame, const TemplateView& view, const Pose& pose, const CameraIntrinsics& K,
                      const SearchLineField* field) {
  RgbImage out = frame;
  const auto projected = project_contour(view, pose, K);
  std::vector<Rgb8> colors(projected.size(), Rgb8{40, 90, 255});
  if (field) {
    for (const auto& c : assemble_correspondences(view, pose, *field, K)) {
      colors[c.point_index] = residual_color(residual(c, pose, K));
    }
  }
  for (std::size_t i = 0; i < projected.size(); ++i) {
    if (!projected[i].valid) continue;
    const int x0 = static_cast<int>(std::lround(projected[i].pixel.x()));
    const int y0 = static_cast<int>(std::lround(projected[i].pixel.y()));
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (out.contains(x0 + dx, y0 + dy)) out(x0 + dx, y0 + dy) = colors[i];
      }
    }
  }
  return out;
}

}  // namespace nlt
