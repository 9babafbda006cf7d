#pragma once

#include "nltrack/geometry.hpp"
#include "nltrack/image.hpp"
#include "nltrack/mesh.hpp"

namespace nlt {

/// Z-buffered silhouette. A mask pixel is set exactly when its depth is finite.
struct SilhouetteRender {
  GrayImage mask;         ///< 1 inside the silhouette, 0 outside
  FloatImage depth;       ///< camera-frame Z (metres), +inf outside
  Image<int> triangle;    ///< index of the visible triangle, -1 outside

  int area() const;
  /// Tight bounding box of the mask; empty when the mask is empty.
  Rect bounding_box() const;
};

/// Rasterises `mesh` under `pose`. A pixel is covered when its centre lies in
/// the closed projected triangle; depth is interpolated perspective-correctly.
/// Triangles with a vertex at or behind Z = 1e-6 are skipped.
/// Throws DomainError for an empty mesh and EmptyRenderError when every
/// triangle lies behind the camera.
SilhouetteRender rasterize_silhouette(const Mesh& mesh, const CameraIntrinsics& K, const Pose& pose,
                                      int width, int height);

inline SilhouetteRender rasterize_silhouette(const Mesh& mesh, const CameraIntrinsics& K, const Pose& pose) {
  return rasterize_silhouette(mesh, K, pose, K.width, K.height);
}

}  // namespace nlt
