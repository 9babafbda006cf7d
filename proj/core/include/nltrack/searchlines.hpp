#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "nltrack/geometry.hpp"
#include "nltrack/image.hpp"
#include "nltrack/segmentation.hpp"

namespace nlt {

/// A putative contour crossing on a search line.
struct SearchCandidate {
  float d = 0;         ///< position along the line, pixels from the line origin
  float response = 0;  ///< falling probability gradient at d (> 0)
  float weight = 0;    ///< (response / W)^2, W the field-wide maximum response
};

struct SearchLineConfig {
  int directions = 16;     ///< D, must be even
  int max_candidates = 3;  ///< M
  int nms_radius = 3;
  bool parallel = false;   ///< build direction pairs on worker threads
};

/// 7-tap Sobel factors: the derivative is normalised to unit slope, the
/// smoothing to unit sum.
inline constexpr std::array<float, 7> kSobel7Derivative = {-1 / 32.f, -4 / 32.f, -5 / 32.f, 0.f,
                                                           5 / 32.f,  4 / 32.f,  1 / 32.f};
inline constexpr std::array<float, 7> kSobel7Smoothing = {1 / 64.f,  6 / 64.f, 15 / 64.f, 20 / 64.f,
                                                          15 / 64.f, 6 / 64.f, 1 / 64.f};

/// Read-only view of one search line.
struct SearchLine {
  Vector2d origin;
  Vector2d dir;
  std::span<const SearchCandidate> candidates;  ///< ascending in d
};

struct LineRef {
  int direction = 0;
  int line = 0;
  friend bool operator==(const LineRef&, const LineRef&) = default;
};

/// D families of parallel lines covering a region of interest. Direction k has
/// angle k * 2pi / D; its lines are the rows of the ROI rotated so that the
/// direction points along +column.
class SearchLineField {
 public:
  struct Direction {
    double angle = 0;
    Vector2d dir;    ///< along-line unit vector (image coordinates)
    Vector2d perp;   ///< across-line unit vector; rows advance along it
    int half_cols = 0;
    int half_rows = 0;
    std::vector<SearchCandidate> slots;   ///< rows * max_candidates
    std::vector<std::uint8_t> counts;     ///< candidates per row

    int rows() const { return 2 * half_rows + 1; }
    int cols() const { return 2 * half_cols + 1; }
  };

  const Rect& roi() const { return roi_; }
  const Vector2d& center() const { return center_; }
  int direction_count() const { return static_cast<int>(directions_.size()); }
  int max_candidates() const { return max_candidates_; }
  /// W: the largest candidate response over the whole field (0 without candidates).
  float max_response() const { return max_response_; }
  const Direction& direction(int k) const { return directions_[k]; }

  /// True when x rounds to a pixel of the ROI.
  bool contains(const Vector2d& x) const;

  /// Index of the direction closest to n (ties to the lower index).
  int direction_for(const Vector2d& n) const;

  /// Line through x in the direction closest to n. Throws OutOfRoiError.
  LineRef line_for(const Vector2d& x, const Vector2d& n) const;

  SearchLine line(LineRef ref) const;
  std::span<const SearchCandidate> candidates(LineRef ref) const;

  /// Continuous (column, row) of image point x in the frame of direction k.
  Vector2d to_rotated(int k, const Vector2d& x) const;
  /// Image point at continuous (column, row) in the frame of direction k.
  Vector2d to_image(int k, const Vector2d& col_row) const;

  std::size_t candidate_count() const;

 private:
  friend SearchLineField build_field(const ProbabilityMap&, const SearchLineConfig&);

  Rect roi_;
  Vector2d center_ = Vector2d::Zero();
  int max_candidates_ = 0;
  float max_response_ = 0;
  std::vector<Direction> directions_;
};

/// Rotates the probability map once per direction pair, takes the horizontal
/// 7x7 Sobel gradient, runs 1D NMS per row and keeps the top-M falling edges.
/// Throws DomainError when the ROI is smaller than 16x16 or D is odd.
SearchLineField build_field(const ProbabilityMap& prob, const SearchLineConfig& config = {});

/// Candidate nearest to position s (ties to the smaller d).
std::optional<SearchCandidate> closest_candidate(std::span<const SearchCandidate> candidates, double s);

/// Positions of the local maxima kept by the field for one response profile:
/// a sample is a maximum when it is positive, strictly above the `radius`
/// samples before it and not below the `radius` samples after it. Returns at
/// most `max_count` sub-pixel refined candidates (largest responses), ascending.
std::vector<SearchCandidate> select_candidates(std::span<const float> response, int radius, int max_count);

/// ROI-sized map with candidate pixels of direction k set to 255 * weight (at least 1).
GrayImage candidate_map(const SearchLineField& field, int k);
/// Writes candidate_map for every direction as dir_XX.png into `directory`.
void dump_candidate_maps(const SearchLineField& field, const std::filesystem::path& directory);

}  // namespace nlt
