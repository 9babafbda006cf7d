#include "nltrack/segmentation.hpp"

#include <numeric>

#include "nltrack/errors.hpp"

namespace nlt {

namespace {

// Separable max filter over a (2r+1)^2 square; pixels outside the image count as 0.
GrayImage max_filter(const GrayImage& in, int r) {
  GrayImage tmp(in.width(), in.height(), 0), out(in.width(), in.height(), 0);
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      std::uint8_t m = 0;
      for (int k = std::max(0, x - r); k <= std::min(in.width() - 1, x + r) && !m; ++k) m = in(k, y) ? 1 : 0;
      tmp(x, y) = m;
    }
  }
  for (int y = 0; y < in.height(); ++y) {
    for (int x = 0; x < in.width(); ++x) {
      std::uint8_t m = 0;
      for (int k = std::max(0, y - r); k <= std::min(in.height() - 1, y + r) && !m; ++k) m = tmp(x, k);
      out(x, y) = m;
    }
  }
  return out;
}

struct BandHistograms {
  std::vector<double> fg, bg;
  std::size_t fg_count = 0, bg_count = 0;
};

BandHistograms accumulate(const ColorHistogramPair& layout, const RgbImage& frame, const SilhouetteRender& sil,
                          const HistogramConfig& config) {
  if (frame.width() != sil.mask.width() || frame.height() != sil.mask.height()) {
    throw DomainError("frame and silhouette sizes differ");
  }
  const Rect box = sil.bounding_box();
  if (box.empty()) throw DomainError("cannot build histograms from an empty silhouette");

  const std::size_t n = static_cast<std::size_t>(layout.bins) * layout.bins * layout.bins;
  BandHistograms h{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};

  GrayImage inner = erode_mask(sil.mask, config.band_margin);
  bool use_inner = std::any_of(inner.pixels().begin(), inner.pixels().end(), [](auto v) { return v != 0; });
  const GrayImage outer = dilate_mask(sil.mask, config.band_margin);
  const Rect roi = box.dilated(config.roi_margin).intersect({0, 0, frame.width(), frame.height()});

  for (int y = roi.y; y < roi.y + roi.height; ++y) {
    for (int x = roi.x; x < roi.x + roi.width; ++x) {
      const bool fg = use_inner ? inner(x, y) != 0 : sil.mask(x, y) != 0;
      if (fg) {
        h.fg[layout.bin_index(frame(x, y))] += 1.0;
        ++h.fg_count;
      } else if (!outer(x, y)) {
        h.bg[layout.bin_index(frame(x, y))] += 1.0;
        ++h.bg_count;
      }
    }
  }
  if (h.bg_count == 0 && config.strict) throw DomainError("no background pixels around the silhouette");
  for (double& v : h.fg) v /= static_cast<double>(h.fg_count);
  if (h.bg_count > 0) {
    for (double& v : h.bg) v /= static_cast<double>(h.bg_count);
  }
  return h;
}

void normalize(std::vector<double>& h) {
  const double s = std::accumulate(h.begin(), h.end(), 0.0);
  if (s > 0) {
    for (double& v : h) v /= s;
  }
}

}  // namespace

std::size_t ColorHistogramPair::bin_index(Rgb8 c) const {
  const int shift_div = 256 / bins;
  const std::size_t r = c.r / shift_div, g = c.g / shift_div, b = c.b / shift_div;
  return (r * bins + g) * bins + b;
}

GrayImage dilate_mask(const GrayImage& mask, int radius) { return radius <= 0 ? mask : max_filter(mask, radius); }

GrayImage erode_mask(const GrayImage& mask, int radius) {
  if (radius <= 0) return mask;
  GrayImage inv(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) inv(x, y) = mask(x, y) ? 0 : 1;
  }
  // Outside the image counts as background, so the border erodes too.
  GrayImage grown = max_filter(inv, radius);
  GrayImage out(mask.width(), mask.height(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      const bool near_border = x < radius || y < radius || x >= mask.width() - radius || y >= mask.height() - radius;
      out(x, y) = (!grown(x, y) && !near_border) ? 1 : 0;
    }
  }
  return out;
}

ColorHistogramPair init_histograms(const RgbImage& frame, const SilhouetteRender& silhouette,
                                   const HistogramConfig& config) {
  if (config.bins_per_channel < 1 || 256 % config.bins_per_channel != 0) {
    throw DomainError("bins_per_channel must divide 256");
  }
  ColorHistogramPair pair;
  pair.bins = config.bins_per_channel;
  pair.learn_rate_fg = config.learn_rate_fg;
  pair.learn_rate_bg = config.learn_rate_bg;
  BandHistograms h = accumulate(pair, frame, silhouette, config);
  pair.fg = std::move(h.fg);
  pair.bg = std::move(h.bg);
  return pair;
}

ColorHistogramPair update_histograms(const ColorHistogramPair& pair, const RgbImage& frame,
                                     const SilhouetteRender& silhouette, const HistogramConfig& config) {
  HistogramConfig lenient = config;
  lenient.strict = false;
  const BandHistograms h = accumulate(pair, frame, silhouette, lenient);
  ColorHistogramPair next = pair;
  auto blend = [](std::vector<double>& dst, const std::vector<double>& src, double rate) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (1.0 - rate) * dst[i] + rate * src[i];
    normalize(dst);
  };
  blend(next.fg, h.fg, pair.learn_rate_fg);
  if (h.bg_count > 0) blend(next.bg, h.bg, pair.learn_rate_bg);
  return next;
}

ProbabilityMap probability_map(const ColorHistogramPair& pair, const RgbImage& frame, const Rect& roi) {
  const Rect clipped = roi.intersect({0, 0, frame.width(), frame.height()});
  if (clipped.empty()) throw DomainError("probability ROI does not intersect the frame");
  ProbabilityMap map{clipped, FloatImage(clipped.width, clipped.height)};
  for (int y = 0; y < clipped.height; ++y) {
    for (int x = 0; x < clipped.width; ++x) {
      const std::size_t bin = pair.bin_index(frame(clipped.x + x, clipped.y + y));
      map.values(x, y) = static_cast<float>(foreground_posterior(pair.fg[bin], pair.bg[bin]));
    }
  }
  return map;
}

}  // namespace nlt
