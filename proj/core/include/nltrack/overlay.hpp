#pragma once

#include "nltrack/image.hpp"
#include "nltrack/searchlines.hpp"
#include "nltrack/templates.hpp"

namespace nlt {

/// Colour for a residual magnitude: green at 0 through yellow to red at `max_residual`.
Rgb8 residual_color(double residual, double max_residual = 10.0);

/// Draws the projected contour of `view` under `pose` over `frame`. With a
/// field, points are coloured by their residual against the closest
/// candidate; unmatched points (and all points without a field) are blue.
RgbImage draw_overlay(const RgbImage& frame, const TemplateView& view, const Pose& pose, const CameraIntrinsics& K,
                      const SearchLineField* field = nullptr);

}  // namespace nlt
