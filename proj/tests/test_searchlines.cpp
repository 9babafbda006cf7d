#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "nltrack/errors.hpp"
#include "nltrack/searchlines.hpp"
#include "support/fields.hpp"
#include "support/random.hpp"

using namespace nlt;
using namespace nlt::testing;

TEST(SelectCandidates, PlateauKeepsFirstSample) {
  const std::vector<float> r = {0, 1, 2, 2, 1, 0, 0, 0, 3, 0};
  const auto c = select_candidates(r, 1, 3);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_NEAR(c[0].d, 2.5, 1e-6);
  EXPECT_EQ(c[1].d, 8.0f);
  EXPECT_EQ(c[1].response, 3.0f);
}

TEST(SelectCandidates, KeepsStrongestInAscendingOrder) {
  const std::vector<float> r = {0, 5, 0, 0, 0, 1, 0, 0, 0, 4, 0, 0, 0, 3, 0};
  const auto c = select_candidates(r, 3, 3);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0].d, 1.0f);
  EXPECT_EQ(c[1].d, 9.0f);
  EXPECT_EQ(c[2].d, 13.0f);
}

TEST(SelectCandidates, IgnoresNonPositiveResponses) {
  const std::vector<float> r = {-3, -1, -2, 0, 0};
  EXPECT_TRUE(select_candidates(r, 3, 3).empty());
}

TEST(SelectCandidates, MatchesSortingReference) {
  Gen gen(50);
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = gen.integer(1, 60), radius = gen.integer(1, 4), m = gen.integer(1, 5);
    std::vector<float> r(n);
    // Coarse levels make ties common.
    for (auto& v : r) v = static_cast<float>(gen.integer(-2, 6)) * 0.25f;
    std::vector<std::pair<float, int>> peaks;
    for (int i = 0; i < n; ++i) {
      bool ok = r[i] > 0;
      for (int t = 1; t <= radius && ok; ++t) {
        if (i - t >= 0 && r[i - t] >= r[i]) ok = false;
        if (i + t < n && r[i + t] > r[i]) ok = false;
      }
      if (ok) peaks.push_back({r[i], i});
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](auto& a, auto& b) { return a.first > b.first; });
    if (static_cast<int>(peaks.size()) > m) peaks.resize(m);
    std::vector<int> expected;
    for (auto& p : peaks) expected.push_back(p.second);
    std::sort(expected.begin(), expected.end());
    const auto got = select_candidates(r, radius, m);
    ASSERT_EQ(got.size(), expected.size()) << trial;
    for (std::size_t k = 0; k < got.size(); ++k) {
      ASSERT_LE(std::abs(got[k].d - expected[k]), 0.5f) << trial;
      ASSERT_EQ(got[k].response, r[expected[k]]) << trial;
    }
  }
}

TEST(ClosestCandidate, Examples) {
  const std::vector<SearchCandidate> c = {{10, 1, 1}, {40, 1, 1}};
  EXPECT_EQ(closest_candidate(c, 12)->d, 10.0f);
  EXPECT_EQ(closest_candidate(c, 30)->d, 40.0f);
  EXPECT_FALSE(closest_candidate({}, 5).has_value());
  const std::vector<SearchCandidate> tie = {{10, 1, 1}, {20, 1, 1}};
  EXPECT_EQ(closest_candidate(tie, 15)->d, 10.0f);
}

TEST(BuildField, ConstantMapHasNoCandidates) {
  ProbabilityMap map = make_map({5, 7, 64, 48});
  for (auto& v : map.values.pixels()) v = 0.7f;
  const SearchLineField f = build_field(map);
  EXPECT_EQ(f.candidate_count(), 0u);
  EXPECT_EQ(f.max_response(), 0.0f);
}

TEST(BuildField, VerticalStepEdge) {
  ProbabilityMap map = make_map({0, 0, 64, 64});
  for (int y = 0; y < 64; ++y) {
    for (int x = 0; x < 32; ++x) map.values(x, y) = 1.0f;
  }
  const SearchLineField f = build_field(map);
  const auto& d0 = f.direction(0);
  for (int row = 0; row < d0.rows(); ++row) {
    const auto c = f.candidates({0, row});
    ASSERT_EQ(c.size(), 1u) << row;
    const Vector2d x = f.to_image(0, Vector2d(c[0].d, row));
    EXPECT_NEAR(x.x(), 31.5, 1.0);
    EXPECT_FLOAT_EQ(c[0].weight, 1.0f);
  }
  // The opposite direction sees a rising edge only.
  for (int row = 0; row < f.direction(8).rows(); ++row) EXPECT_TRUE(f.candidates({8, row}).empty());
}

TEST(BuildField, DirectionsAreUniform) {
  Gen gen(51);
  const SearchLineField f = build_field(random_map(gen, {0, 0, 40, 30}));
  ASSERT_EQ(f.direction_count(), 16);
  for (int k = 0; k < 16; ++k) {
    const double a = 2 * std::numbers::pi * k / 16;
    EXPECT_NEAR(f.direction(k).angle, a, 1e-12);
    EXPECT_NEAR((f.direction(k).dir - Vector2d(std::cos(a), std::sin(a))).norm(), 0, 1e-12);
  }
}

TEST(BuildField, MatchesPerLineOracle) {
  Gen gen(52);
  for (int trial = 0; trial < 20; ++trial) {
    const Rect roi{gen.integer(0, 50), gen.integer(0, 50), gen.integer(40, 90), gen.integer(40, 90)};
    const ProbabilityMap map = random_map(gen, roi);
    const SearchLineField f = build_field(map);
    std::size_t compared = 0;
    for (int k = 0; k < f.direction_count(); ++k) {
      const auto& dir = f.direction(k);
      for (int row = 0; row < dir.rows(); ++row) {
        const SearchLine line = f.line({k, row});
        const auto peaks = line_oracle(map, line.origin, line.dir, dir.perp, dir.cols(), 3, -1);
        ASSERT_TRUE(oracle_agrees(line.candidates, peaks, 3)) << "trial " << trial << " dir " << k << " row " << row;
        compared += line.candidates.size();
      }
    }
    EXPECT_GT(compared, 100u);
  }
}

TEST(BuildField, CandidateInvariants) {
  Gen gen(53);
  for (int trial = 0; trial < 20; ++trial) {
    const SearchLineField f = build_field(random_map(gen, {0, 0, gen.integer(16, 80), gen.integer(16, 80)}));
    int at_max = 0;
    for (int k = 0; k < f.direction_count(); ++k) {
      for (int row = 0; row < f.direction(k).rows(); ++row) {
        const auto c = f.candidates({k, row});
        ASSERT_LE(c.size(), 3u);
        for (std::size_t i = 0; i < c.size(); ++i) {
          ASSERT_GT(c[i].response, 0.f);
          ASSERT_GE(c[i].weight, 0.f);
          ASSERT_LE(c[i].weight, 1.f);
          if (i > 0) {
            ASSERT_GE(c[i].d - c[i - 1].d, 3.0f);
          }
          at_max += c[i].weight == 1.0f;
        }
      }
    }
    if (f.candidate_count() > 0) {
      EXPECT_EQ(at_max, 1);
    }
  }
}

TEST(BuildField, EveryPixelMapsToOneLinePerDirection) {
  Gen gen(54);
  const Rect roi{10, 20, 64, 64};
  const SearchLineField f = build_field(random_map(gen, roi));
  for (int k = 0; k < f.direction_count(); ++k) {
    const auto& dir = f.direction(k);
    std::vector<int> hits(dir.rows(), 0);
    for (int y = roi.y; y < roi.y + roi.height; ++y) {
      for (int x = roi.x; x < roi.x + roi.width; ++x) {
        const Vector2d p(x, y);
        const LineRef ref = f.line_for(p, dir.dir);
        ASSERT_EQ(ref.direction, k);
        ASSERT_GE(ref.line, 0);
        ASSERT_LT(ref.line, dir.rows());
        // The pixel lies within half a pixel of its line and of no other.
        const SearchLine line = f.line(ref);
        const double off = dir.perp.dot(p - line.origin);
        ASSERT_LE(std::abs(off), 0.5 + 1e-9);
        const double along = line.dir.dot(p - line.origin);
        ASSERT_GE(along, 0.0);
        ASSERT_LE(along, dir.cols() - 1.0);
        ++hits[ref.line];
      }
    }
    int total = 0;
    for (int h : hits) total += h;
    ASSERT_EQ(total, roi.width * roi.height);
  }
}

TEST(BuildField, RotatedFrameRoundTrip) {
  Gen gen(55);
  const SearchLineField f = build_field(random_map(gen, {0, 0, 50, 70}));
  for (int k = 0; k < f.direction_count(); ++k) {
    for (int row = 0; row < f.direction(k).rows(); ++row) {
      for (const auto& c : f.candidates({k, row})) {
        const Vector2d img = f.to_image(k, Vector2d(c.d, row));
        const Vector2d back = f.to_rotated(k, img);
        ASSERT_NEAR(back.x(), c.d, 0.5);
        ASSERT_NEAR(back.y(), row, 0.5);
      }
    }
  }
}

TEST(BuildField, OppositeDirectionsShareLines) {
  Gen gen(56);
  const SearchLineField f = build_field(random_map(gen, {0, 0, 48, 48}));
  const int half = f.direction_count() / 2;
  for (int k = 0; k < half; ++k) {
    const auto& a = f.direction(k);
    const auto& b = f.direction(k + half);
    ASSERT_EQ(a.rows(), b.rows());
    for (int row = 0; row < a.rows(); ++row) {
      const SearchLine la = f.line({k, row}), lb = f.line({k + half, a.rows() - 1 - row});
      ASSERT_LT((la.origin + (a.cols() - 1) * la.dir - lb.origin).norm(), 1e-9);
    }
  }
}

TEST(BuildField, ParallelBuildIsIdentical) {
  Gen gen(57);
  const ProbabilityMap map = random_map(gen, {3, 4, 70, 55});
  SearchLineConfig par;
  par.parallel = true;
  const SearchLineField a = build_field(map), b = build_field(map, par);
  for (int k = 0; k < a.direction_count(); ++k) {
    ASSERT_EQ(a.direction(k).counts, b.direction(k).counts);
    for (std::size_t i = 0; i < a.direction(k).slots.size(); ++i) {
      ASSERT_EQ(a.direction(k).slots[i].d, b.direction(k).slots[i].d);
      ASSERT_EQ(a.direction(k).slots[i].weight, b.direction(k).slots[i].weight);
    }
  }
}

TEST(BuildField, RejectsBadInput) {
  EXPECT_THROW(build_field(make_map({0, 0, 15, 40})), DomainError);
  SearchLineConfig odd;
  odd.directions = 7;
  EXPECT_THROW(build_field(make_map({0, 0, 40, 40}), odd), DomainError);
}

TEST(LineFor, DirectionQuantisation) {
  const SearchLineField f = build_field(make_map({0, 0, 32, 32}));
  const Vector2d x(10, 10);
  EXPECT_EQ(f.line_for(x, {1, 0}).direction, 0);
  EXPECT_EQ(f.line_for(x, {std::cos(deg(11)), std::sin(deg(11))}).direction, 0);
  EXPECT_EQ(f.line_for(x, {std::cos(deg(11.5)), std::sin(deg(11.5))}).direction, 1);
  EXPECT_EQ(f.line_for(x, {-1, 0}).direction, 8);
  EXPECT_EQ(f.line_for(x, {std::cos(deg(-11)), std::sin(deg(-11))}).direction, 0);
  EXPECT_EQ(f.line_for(x, {std::cos(deg(-12)), std::sin(deg(-12))}).direction, 15);
}

TEST(LineFor, OutsideRoiThrows) {
  const SearchLineField f = build_field(make_map({10, 10, 32, 32}));
  EXPECT_THROW(f.line_for({5, 20}, {1, 0}), OutOfRoiError);
  EXPECT_THROW(f.line_for({20, 42}, {1, 0}), OutOfRoiError);
  EXPECT_NO_THROW(f.line_for({41.4, 41.4}, {1, 0}));
}

TEST(CandidateMaps, OneImagePerDirection) {
  Gen gen(58);
  const SearchLineField f = build_field(random_map(gen, {0, 0, 40, 40}));
  const auto dir = std::filesystem::temp_directory_path() / "nltrack_test_candidate_maps";
  std::filesystem::remove_all(dir);
  dump_candidate_maps(f, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "dir_00.png"));
  EXPECT_TRUE(std::filesystem::exists(dir / "dir_15.png"));
  const GrayImage m = candidate_map(f, 3);
  EXPECT_EQ(m.width(), 40);
  EXPECT_EQ(m.height(), 40);
}
