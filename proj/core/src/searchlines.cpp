#include "nltrack/searchlines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numbers>

#include "nltrack/errors.hpp"

namespace nlt {

namespace {

constexpr int kPad = 3;  // Sobel half-width

// Top `max_count` peaks by response (ties to the lower index), written to `out`
// in ascending position. Returns the count.
int select_into(std::span<const float> response, int radius, int max_count, SearchCandidate* out) {
  struct Peak {
    int index;
    float value;
  };
  constexpr int kStack = 16;
  Peak stack[kStack];
  std::vector<Peak> heap;
  Peak* top = stack;
  if (max_count > kStack) {
    heap.resize(max_count);
    top = heap.data();
  }
  int count = 0;
  const int n = static_cast<int>(response.size());
  const float* r = response.data();
  auto consider = [&](int i) {
    const float v = r[i];
    if (count == max_count && !(v > top[count - 1].value)) return;
    // Insert by descending value; an equal value never displaces an earlier peak.
    int pos = count < max_count ? count++ : count - 1;
    while (pos > 0 && top[pos - 1].value < v) {
      top[pos] = top[pos - 1];
      --pos;
    }
    top[pos] = {i, v};
  };
  auto bounded_peak = [&](int i) {
    const float v = r[i];
    if (!(v > 0)) return false;
    for (int t = 1; t <= radius; ++t) {
      if (i - t >= 0 && r[i - t] >= v) return false;
      if (i + t < n && r[i + t] > v) return false;
    }
    return true;
  };
  const int lo = std::min(radius, n), hi = std::max(lo, n - radius);
  for (int i = 0; i < lo; ++i) {
    if (bounded_peak(i)) consider(i);
  }
  // Branch-free prefilter on the immediate neighbours, then the full check on survivors.
  thread_local std::vector<int> survivors;
  survivors.resize(static_cast<std::size_t>(std::max(0, hi - lo)));
  int* out_idx = survivors.data();
  int kept = 0;
  constexpr int kBlock = 16;
  for (int b = lo; b < hi; b += kBlock) {
    const int e = std::min(b + kBlock, hi);
    float block_max = 0;
    for (int i = b; i < e; ++i) block_max = std::max(block_max, r[i]);
    if (!(block_max > 0)) continue;
    for (int i = b; i < e; ++i) {
      const float v = r[i];
      out_idx[kept] = i;
      kept += (v > 0) & (r[i - 1] < v) & (r[i + 1] <= v);
    }
  }
  for (int k = 0; k < kept; ++k) {
    const int i = out_idx[k];
    const float v = r[i];
    bool peak = true;
    for (int t = 2; t <= radius && peak; ++t) peak = r[i - t] < v && r[i + t] <= v;
    if (peak) consider(i);
  }
  for (int i = hi; i < n; ++i) {
    if (bounded_peak(i)) consider(i);
  }
  std::sort(top, top + count, [](const Peak& a, const Peak& b) { return a.index < b.index; });
  for (int k = 0; k < count; ++k) {
    const Peak& p = top[k];
    float offset = 0;
    if (p.index > 0 && p.index + 1 < n) {
      const float l = response[p.index - 1], r = response[p.index + 1];
      const float curvature = l - 2 * p.value + r;
      if (curvature < 0) offset = std::clamp(0.5f * (l - r) / curvature, -0.5f, 0.5f);
    }
    out[k] = {static_cast<float>(p.index) + offset, p.value, 0.f};
  }
  return count;
}

void store_row(SearchLineField::Direction& dir, int row, std::span<const float> response, int radius, int m) {
  dir.counts[row] = static_cast<std::uint8_t>(
      select_into(response, radius, m, dir.slots.data() + static_cast<std::ptrdiff_t>(row) * m));
}

}  // namespace

std::vector<SearchCandidate> select_candidates(std::span<const float> response, int radius, int max_count) {
  if (max_count < 1) return {};
  std::vector<SearchCandidate> out(max_count);
  out.resize(select_into(response, radius, max_count, out.data()));
  return out;
}

std::optional<SearchCandidate> closest_candidate(std::span<const SearchCandidate> candidates, double s) {
  std::optional<SearchCandidate> best;
  double best_dist = 0;
  for (const auto& c : candidates) {
    const double dist = std::abs(c.d - s);
    if (!best || dist < best_dist) best = c, best_dist = dist;
  }
  return best;
}

bool SearchLineField::contains(const Vector2d& x) const {
  if (!x.allFinite()) return false;
  return roi_.contains(static_cast<int>(std::lround(x.x())), static_cast<int>(std::lround(x.y())));
}

int SearchLineField::direction_for(const Vector2d& n) const {
  int best = 0;
  double best_dot = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < direction_count(); ++k) {
    const double d = directions_[k].dir.dot(n);
    if (d > best_dot) best_dot = d, best = k;
  }
  return best;
}

LineRef SearchLineField::line_for(const Vector2d& x, const Vector2d& n) const {
  if (!contains(x)) throw OutOfRoiError("point lies outside the search-line ROI");
  const int k = direction_for(n);
  const Direction& d = directions_[k];
  const int row = static_cast<int>(std::lround(d.perp.dot(x - center_) + d.half_rows));
  return {k, std::clamp(row, 0, d.rows() - 1)};
}

std::span<const SearchCandidate> SearchLineField::candidates(LineRef ref) const {
  const Direction& d = directions_[ref.direction];
  return {d.slots.data() + static_cast<std::ptrdiff_t>(ref.line) * max_candidates_, d.counts[ref.line]};
}

SearchLine SearchLineField::line(LineRef ref) const {
  const Direction& d = directions_[ref.direction];
  return {to_image(ref.direction, Vector2d(0, ref.line)), d.dir, candidates(ref)};
}

Vector2d SearchLineField::to_rotated(int k, const Vector2d& x) const {
  const Direction& d = directions_[k];
  const Vector2d rel = x - center_;
  return {d.dir.dot(rel) + d.half_cols, d.perp.dot(rel) + d.half_rows};
}

Vector2d SearchLineField::to_image(int k, const Vector2d& col_row) const {
  const Direction& d = directions_[k];
  return center_ + (col_row.x() - d.half_cols) * d.dir + (col_row.y() - d.half_rows) * d.perp;
}

std::size_t SearchLineField::candidate_count() const {
  std::size_t n = 0;
  for (const auto& d : directions_) {
    for (auto c : d.counts) n += c;
  }
  return n;
}

SearchLineField build_field(const ProbabilityMap& prob, const SearchLineConfig& config) {
  const Rect& roi = prob.roi;
  if (roi.width < 16 || roi.height < 16) throw DomainError("search-line ROI must be at least 16x16");
  if (config.directions < 2 || config.directions % 2 != 0) throw DomainError("direction count must be even");
  if (config.max_candidates < 1 || config.max_candidates > 255) throw DomainError("max_candidates out of range");

  SearchLineField field;
  field.roi_ = roi;
  field.center_ = {roi.x + 0.5 * (roi.width - 1), roi.y + 0.5 * (roi.height - 1)};
  field.max_candidates_ = config.max_candidates;
  field.directions_.resize(config.directions);

  const int D = config.directions;
  const int M = config.max_candidates;
  const double ex = 0.5 * (roi.width - 1), ey = 0.5 * (roi.height - 1);

  // Direction k looks for falling edges (-dp/du); k + D/2 traverses the same
  // rows backwards and reuses the gradient with the opposite sign.
  auto build_pair = [&](int k) {
    const double angle = 2.0 * std::numbers::pi * k / D;
    const Vector2d n(std::cos(angle), std::sin(angle));
    const Vector2d m(-n.y(), n.x());
    const int half_cols = static_cast<int>(std::ceil(std::abs(n.x()) * ex + std::abs(n.y()) * ey - 1e-9)) + 1;
    const int half_rows = static_cast<int>(std::ceil(std::abs(m.x()) * ex + std::abs(m.y()) * ey - 1e-9)) + 1;
    const int cols = 2 * half_cols + 1, rows = 2 * half_rows + 1;
    const int pcols = cols + 2 * kPad, prows = rows + 2 * kPad;

    // Rotated probability map (bilinear, border-replicated), padded for the kernel.
    FloatImage rotated(pcols, prows);
    const float* src = prob.values.row(0).data();
    const std::ptrdiff_t stride = prob.values.width();
    const double max_x = prob.values.width() - 1, max_y = prob.values.height() - 1;
    const Vector2d origin = field.center_ - (half_cols + kPad) * n - (half_rows + kPad) * m -
                            Vector2d(roi.x, roi.y);
    for (int j = 0; j < prows; ++j) {
      const Vector2d row_start = origin + j * m;
      auto out = rotated.row(j);
      for (int i = 0; i < pcols; ++i) {
        const double x = row_start.x() + i * n.x(), y = row_start.y() + i * n.y();
        if (x >= 0 && y >= 0 && x < max_x && y < max_y) {
          const int x0 = static_cast<int>(x), y0 = static_cast<int>(y);
          const float ax = static_cast<float>(x - x0), ay = static_cast<float>(y - y0);
          const float* r0 = src + static_cast<std::ptrdiff_t>(y0) * stride + x0;
          const float* r1 = r0 + stride;
          const float top = r0[0] + ax * (r0[1] - r0[0]);
          const float bottom = r1[0] + ax * (r1[1] - r1[0]);
          out[i] = top + ay * (bottom - top);
        } else {
          out[i] = sample_bilinear(prob.values, x, y);
        }
      }
    }

    // Vertical smoothing, then the antisymmetric horizontal derivative
    // (exactly zero on constant input).
    FloatImage smooth(pcols, rows);
    for (int j = 0; j < rows; ++j) {
      auto out = smooth.row(j);
      for (int i = 0; i < pcols; ++i) {
        float s = 0;
        for (int t = 0; t < 7; ++t) s += kSobel7Smoothing[t] * rotated(i, j + t);
        out[i] = s;
      }
    }
    FloatImage grad(cols, rows);
    for (int j = 0; j < rows; ++j) {
      const auto in = smooth.row(j);
      auto out = grad.row(j);
      for (int i = 0; i < cols; ++i) {
        const int c = i + kPad;
        out[i] = kSobel7Derivative[4] * (in[c + 1] - in[c - 1]) + kSobel7Derivative[5] * (in[c + 2] - in[c - 2]) +
                 kSobel7Derivative[6] * (in[c + 3] - in[c - 3]);
      }
    }

    auto init = [&](SearchLineField::Direction& d, double a, const Vector2d& dir, const Vector2d& perp) {
      d.angle = a;
      d.dir = dir;
      d.perp = perp;
      d.half_cols = half_cols;
      d.half_rows = half_rows;
      d.slots.assign(static_cast<std::size_t>(rows) * M, SearchCandidate{});
      d.counts.assign(rows, 0);
    };
    SearchLineField::Direction& fwd = field.directions_[k];
    SearchLineField::Direction& bwd = field.directions_[k + D / 2];
    init(fwd, angle, n, m);
    init(bwd, angle + std::numbers::pi, -n, -m);

    std::vector<float> response(cols);
    for (int j = 0; j < rows; ++j) {
      const auto g = grad.row(j);
      for (int i = 0; i < cols; ++i) response[i] = -g[i];
      store_row(fwd, j, response, config.nms_radius, M);
      for (int i = 0; i < cols; ++i) response[i] = g[cols - 1 - i];
      store_row(bwd, rows - 1 - j, response, config.nms_radius, M);
    }
  };

  if (config.parallel) {
    std::vector<std::future<void>> jobs;
    for (int k = 0; k < D / 2; ++k) jobs.push_back(std::async(std::launch::async, build_pair, k));
    for (auto& j : jobs) j.get();
  } else {
    for (int k = 0; k < D / 2; ++k) build_pair(k);
  }

  float w = 0;
  for (const auto& d : field.directions_) {
    for (std::size_t r = 0; r < d.counts.size(); ++r) {
      for (int c = 0; c < d.counts[r]; ++c) w = std::max(w, d.slots[r * M + c].response);
    }
  }
  field.max_response_ = w;
  if (w > 0) {
    for (auto& d : field.directions_) {
      for (auto& s : d.slots) {
        const float ratio = s.response / w;
        s.weight = ratio * ratio;
      }
    }
  }
  return field;
}

GrayImage candidate_map(const SearchLineField& field, int k) {
  const Rect& roi = field.roi();
  GrayImage img(roi.width, roi.height, 0);
  const auto& dir = field.direction(k);
  for (int row = 0; row < dir.rows(); ++row) {
    for (const auto& c : field.candidates({k, row})) {
      const Vector2d p = field.to_image(k, Vector2d(c.d, row));
      const int x = static_cast<int>(std::lround(p.x())) - roi.x;
      const int y = static_cast<int>(std::lround(p.y())) - roi.y;
      if (img.contains(x, y)) {
        img(x, y) = std::max<std::uint8_t>(img(x, y), static_cast<std::uint8_t>(std::clamp(255.f * c.weight, 1.f, 255.f)));
      }
    }
  }
  return img;
}

void dump_candidate_maps(const SearchLineField& field, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  for (int k = 0; k < field.direction_count(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "dir_%02d.png", k);
    write_png(directory / name, candidate_map(field, k));
  }
}

}  // namespace nlt
