#pragma once

#include <vector>

#include "nltrack/image.hpp"
#include "nltrack/render.hpp"

namespace nlt {

struct HistogramConfig {
  int bins_per_channel = 32;
  double learn_rate_fg = 0.1;
  double learn_rate_bg = 0.2;
  /// Erosion (foreground) / dilation (background) margin separating the two bands.
  int band_margin = 3;
  /// Background samples come from the silhouette box dilated by this many pixels.
  int roi_margin = 100;
  /// Throw when no background pixels are available instead of keeping an all-zero histogram.
  bool strict = true;
};

/// Global foreground/background RGB histograms. Each histogram holds
/// bins^3 densities summing to 1 (or all zero before it has seen a pixel).
struct ColorHistogramPair {
  int bins = 32;
  double learn_rate_fg = 0.1;
  double learn_rate_bg = 0.2;
  std::vector<double> fg;
  std::vector<double> bg;

  std::size_t bin_index(Rgb8 c) const;
  double fg_density(Rgb8 c) const { return fg[bin_index(c)]; }
  double bg_density(Rgb8 c) const { return bg[bin_index(c)]; }
};

/// Foreground posterior over a region of interest (original image coordinates).
struct ProbabilityMap {
  Rect roi;
  FloatImage values;  ///< values(x - roi.x, y - roi.y)

  float at(int x, int y) const { return values(x - roi.x, y - roi.y); }
};

constexpr double kProbabilityEpsilon = 1e-6;

/// (pf + eps) / (pf + pb + 2 eps).
inline double foreground_posterior(double pf, double pb) {
  return (pf + kProbabilityEpsilon) / (pf + pb + 2 * kProbabilityEpsilon);
}

GrayImage dilate_mask(const GrayImage& mask, int radius);
GrayImage erode_mask(const GrayImage& mask, int radius);

/// Builds histograms from the eroded silhouette (foreground) and from the
/// dilated-box band outside the dilated silhouette (background).
/// Throws DomainError for an empty silhouette, and for an empty background
/// band when `config.strict` is set.
ColorHistogramPair init_histograms(const RgbImage& frame, const SilhouetteRender& silhouette,
                                   const HistogramConfig& config = {});

/// h <- (1 - rate) h + rate h_frame for each histogram, then renormalised.
ColorHistogramPair update_histograms(const ColorHistogramPair& pair, const RgbImage& frame,
                                     const SilhouetteRender& silhouette, const HistogramConfig& config = {});

/// Evaluates the posterior on `roi` clipped to the frame. Throws DomainError
/// when the clipped ROI is empty.
ProbabilityMap probability_map(const ColorHistogramPair& pair, const RgbImage& frame, const Rect& roi);

}  // namespace nlt
