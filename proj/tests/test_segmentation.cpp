#include <gtest/gtest.h>

#include <numeric>

#include "nltrack/errors.hpp"
#include "nltrack/segmentation.hpp"
#include "support/random.hpp"

using namespace nlt;
using nlt::testing::Gen;

namespace {

constexpr Rgb8 kRed{255, 0, 0};
constexpr Rgb8 kBlue{0, 0, 255};
constexpr Rgb8 kGreen{0, 255, 0};

SilhouetteRender silhouette_from(const GrayImage& mask) {
  SilhouetteRender s{mask, FloatImage(mask.width(), mask.height(), std::numeric_limits<float>::infinity()),
                     Image<int>(mask.width(), mask.height(), -1)};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) s.depth(x, y) = 1.0f, s.triangle(x, y) = 0;
    }
  }
  return s;
}

GrayImage box_mask(int w, int h, Rect box) {
  GrayImage m(w, h, 0);
  for (int y = box.y; y < box.y + box.height; ++y) {
    for (int x = box.x; x < box.x + box.width; ++x) m(x, y) = 1;
  }
  return m;
}

RgbImage two_color(const GrayImage& mask, Rgb8 fg, Rgb8 bg) {
  RgbImage img(mask.width(), mask.height(), bg);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y)) img(x, y) = fg;
    }
  }
  return img;
}

double total(const std::vector<double>& h) { return std::accumulate(h.begin(), h.end(), 0.0); }

// Square-window morphology evaluated pixel by pixel; outside counts as background.
GrayImage morph_oracle(const GrayImage& m, int r, bool dilate) {
  GrayImage out(m.width(), m.height(), 0);
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      bool any = false, all = true;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const bool v = m.contains(x + dx, y + dy) && m(x + dx, y + dy);
          any |= v;
          all &= v;
        }
      }
      out(x, y) = dilate ? any : all;
    }
  }
  return out;
}

}  // namespace

TEST(Histograms, PureColoursFillSingleBins) {
  const GrayImage mask = box_mask(80, 60, {30, 20, 20, 20});
  const auto pair = init_histograms(two_color(mask, kRed, kBlue), silhouette_from(mask));
  EXPECT_DOUBLE_EQ(pair.fg_density(kRed), 1.0);
  EXPECT_DOUBLE_EQ(pair.bg_density(kBlue), 1.0);
  EXPECT_DOUBLE_EQ(pair.fg_density(kBlue), 0.0);
  EXPECT_NEAR(total(pair.fg), 1.0, 1e-12);
  EXPECT_NEAR(total(pair.bg), 1.0, 1e-12);
}

TEST(Histograms, BandMarginKeepsBoundaryPixelsOut) {
  // A one-pixel ring of green just outside the mask is inside the dilated band and never sampled.
  const GrayImage mask = box_mask(80, 60, {30, 20, 20, 20});
  RgbImage img = two_color(mask, kRed, kBlue);
  for (int x = 29; x <= 50; ++x) img(x, 19) = img(x, 40) = kGreen;
  const auto pair = init_histograms(img, silhouette_from(mask));
  EXPECT_DOUBLE_EQ(pair.bg_density(kGreen), 0.0);
  EXPECT_DOUBLE_EQ(pair.fg_density(kGreen), 0.0);
}

TEST(Histograms, MaskCoveringFrameHasNoBackground) {
  const GrayImage mask(40, 30, 1);
  const RgbImage img(40, 30, kRed);
  EXPECT_THROW(init_histograms(img, silhouette_from(mask)), DomainError);
  HistogramConfig lenient;
  lenient.strict = false;
  const auto pair = init_histograms(img, silhouette_from(mask), lenient);
  EXPECT_EQ(total(pair.bg), 0.0);
  EXPECT_NEAR(total(pair.fg), 1.0, 1e-12);
}

TEST(Histograms, EmptyMaskThrows) {
  const GrayImage mask(40, 30, 0);
  EXPECT_THROW(init_histograms(RgbImage(40, 30, kRed), silhouette_from(mask)), DomainError);
}

TEST(Histograms, BinCountMustDivide256) {
  HistogramConfig c;
  c.bins_per_channel = 30;
  const GrayImage mask = box_mask(80, 60, {30, 20, 20, 20});
  EXPECT_THROW(init_histograms(two_color(mask, kRed, kBlue), silhouette_from(mask), c), DomainError);
}

TEST(Histograms, InitIsDeterministic) {
  Gen gen(41);
  const GrayImage mask = box_mask(80, 60, {25, 15, 30, 30});
  RgbImage img(80, 60);
  for (auto& p : img.pixels()) {
    p = Rgb8{static_cast<std::uint8_t>(gen.integer(0, 255)), static_cast<std::uint8_t>(gen.integer(0, 255)),
             static_cast<std::uint8_t>(gen.integer(0, 255))};
  }
  const auto a = init_histograms(img, silhouette_from(mask));
  const auto b = init_histograms(img, silhouette_from(mask));
  EXPECT_EQ(a.fg, b.fg);
  EXPECT_EQ(a.bg, b.bg);
}

TEST(HistogramUpdate, ZeroRateKeepsHistograms) {
  const GrayImage mask = box_mask(80, 60, {30, 20, 20, 20});
  HistogramConfig c;
  c.learn_rate_fg = c.learn_rate_bg = 0.0;
  const auto pair = init_histograms(two_color(mask, kRed, kBlue), silhouette_from(mask), c);
  const auto next = update_histograms(pair, two_color(mask, kGreen, kRed), silhouette_from(mask), c);
  EXPECT_EQ(next.fg, pair.fg);
  EXPECT_EQ(next.bg, pair.bg);
}

TEST(HistogramUpdate, UnitRateEqualsInitOnNewFrame) {
  const GrayImage mask = box_mask(80, 60, {30, 20, 20, 20});
  HistogramConfig c;
  c.learn_rate_fg = c.learn_rate_bg = 1.0;
  const auto pair = init_histograms(two_color(mask, kRed, kBlue), silhouette_from(mask), c);
  const RgbImage next_frame = two_color(mask, kGreen, kRed);
  const auto next = update_histograms(pair, next_frame, silhouette_from(mask), c);
  const auto fresh = init_histograms(next_frame, silhouette_from(mask), c);
  for (std::size_t i = 0; i < fresh.fg.size(); ++i) {
    ASSERT_NEAR(next.fg[i], fresh.fg[i], 1e-15);
    ASSERT_NEAR(next.bg[i], fresh.bg[i], 1e-15);
  }
}

TEST(HistogramUpdate, HalfRateSplitsMass) {
  const GrayImage mask = box_mask(80, 60, {30, 20, 20, 20});
  HistogramConfig c;
  c.learn_rate_fg = c.learn_rate_bg = 0.5;
  const auto pair = init_histograms(two_color(mask, kRed, kBlue), silhouette_from(mask), c);
  const auto next = update_histograms(pair, two_color(mask, kGreen, kRed), silhouette_from(mask), c);
  EXPECT_NEAR(next.fg_density(kRed), 0.5, 1e-12);
  EXPECT_NEAR(next.fg_density(kGreen), 0.5, 1e-12);
  EXPECT_NEAR(next.bg_density(kBlue), 0.5, 1e-12);
  EXPECT_NEAR(next.bg_density(kRed), 0.5, 1e-12);
}

TEST(HistogramUpdate, IsAConvexCombination) {
  Gen gen(42);
  auto random_frame = [&] {
    RgbImage img(64, 48);
    for (auto& p : img.pixels()) {
      p = Rgb8{static_cast<std::uint8_t>(gen.integer(0, 80)), static_cast<std::uint8_t>(gen.integer(0, 80)),
               static_cast<std::uint8_t>(gen.integer(0, 80))};
    }
    return img;
  };
  HistogramConfig c;
  c.bins_per_channel = 8;
  for (int trial = 0; trial < 20; ++trial) {
    const GrayImage mask = box_mask(64, 48, {gen.integer(10, 25), gen.integer(8, 18), 20, 16});
    c.learn_rate_fg = gen.uniform(0, 1);
    c.learn_rate_bg = gen.uniform(0, 1);
    const RgbImage f0 = random_frame(), f1 = random_frame();
    const auto a = init_histograms(f0, silhouette_from(mask), c);
    const auto b = init_histograms(f1, silhouette_from(mask), c);
    const auto next = update_histograms(a, f1, silhouette_from(mask), c);
    for (std::size_t i = 0; i < a.fg.size(); ++i) {
      ASSERT_LE(next.fg[i], std::max(a.fg[i], b.fg[i]) + 1e-12);
      ASSERT_GE(next.fg[i], std::min(a.fg[i], b.fg[i]) - 1e-12);
      ASSERT_LE(next.bg[i], std::max(a.bg[i], b.bg[i]) + 1e-12);
    }
    ASSERT_NEAR(total(next.fg), 1.0, 1e-9);
    ASSERT_NEAR(total(next.bg), 1.0, 1e-9);
  }
}

TEST(Posterior, UnseenColourIsOneHalf) { EXPECT_DOUBLE_EQ(foreground_posterior(0.0, 0.0), 0.5); }

TEST(Posterior, EqualDensitiesAreOneHalf) {
  for (double p : {1e-9, 0.01, 0.3, 1.0}) EXPECT_NEAR(foreground_posterior(p, p), 0.5, 1e-9);
}

TEST(Posterior, ForegroundOnlyColour) {
  EXPECT_NEAR(foreground_posterior(0.1, 0.0), (0.1 + 1e-6) / (0.1 + 2e-6), 1e-15);
  EXPECT_NEAR(foreground_posterior(0.1, 0.0), 0.99999, 1e-6);
}

TEST(ProbabilityMap, ValuesInUnitIntervalAndSymmetricUnderSwap) {
  Gen gen(43);
  for (int trial = 0; trial < 10; ++trial) {
    ColorHistogramPair pair;
    pair.bins = 4;
    pair.fg.assign(64, 0.0);
    pair.bg.assign(64, 0.0);
    for (int i = 0; i < 64; ++i) {
      if (gen.uniform(0, 1) < 0.7) pair.fg[i] = gen.uniform(0, 1);
      if (gen.uniform(0, 1) < 0.7) pair.bg[i] = gen.uniform(0, 1);
    }
    RgbImage img(30, 20);
    for (auto& p : img.pixels()) {
      p = Rgb8{static_cast<std::uint8_t>(gen.integer(0, 255)), static_cast<std::uint8_t>(gen.integer(0, 255)),
               static_cast<std::uint8_t>(gen.integer(0, 255))};
    }
    ColorHistogramPair swapped = pair;
    std::swap(swapped.fg, swapped.bg);
    const Rect roi{0, 0, 30, 20};
    const auto a = probability_map(pair, img, roi);
    const auto b = probability_map(swapped, img, roi);
    for (int y = 0; y < 20; ++y) {
      for (int x = 0; x < 30; ++x) {
        ASSERT_GE(a.at(x, y), 0.0f);
        ASSERT_LE(a.at(x, y), 1.0f);
        const Rgb8 c = img(x, y);
        const double p = foreground_posterior(pair.fg_density(c), pair.bg_density(c));
        const double q = foreground_posterior(swapped.fg_density(c), swapped.bg_density(c));
        ASSERT_NEAR(p + q, 1.0, 1e-9);
        ASSERT_NEAR(a.at(x, y) + b.at(x, y), 1.0, 1e-6);
      }
    }
  }
}

TEST(ProbabilityMap, RoiIsClippedToFrame) {
  const GrayImage mask = box_mask(80, 60, {30, 20, 20, 20});
  const RgbImage img = two_color(mask, kRed, kBlue);
  const auto pair = init_histograms(img, silhouette_from(mask));
  const auto map = probability_map(pair, img, Rect{-10, 30, 50, 50});
  EXPECT_EQ(map.roi, (Rect{0, 30, 40, 30}));
  EXPECT_EQ(map.values.width(), 40);
  EXPECT_NEAR(map.at(35, 35), 1.0, 1e-5);
  EXPECT_NEAR(map.at(5, 50), 0.0, 1e-5);
  EXPECT_THROW(probability_map(pair, img, Rect{100, 100, 10, 10}), DomainError);
}

TEST(Morphology, MatchesWindowOracle) {
  Gen gen(44);
  for (int trial = 0; trial < 10; ++trial) {
    GrayImage m(40, 30, 0);
    for (auto& v : m.pixels()) v = gen.uniform(0, 1) < 0.6;
    const int r = gen.integer(1, 3);
    EXPECT_TRUE(std::ranges::equal(dilate_mask(m, r).pixels(), morph_oracle(m, r, true).pixels()));
    EXPECT_TRUE(std::ranges::equal(erode_mask(m, r).pixels(), morph_oracle(m, r, false).pixels()));
  }
}
