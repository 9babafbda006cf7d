#pragma once

#include <cstddef>
#include <deque>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "nltrack/local_optimizer.hpp"

namespace nlt {

inline constexpr double kGridInterval = std::numbers::pi / 12;

struct GridPoint {
  int i = 0, j = 0;
  OutOfPlaneParam theta;
  Matrix3d delta = Matrix3d::Identity();  ///< minimal rotation taking z to direction_from_theta(theta)
};

/// Out-of-plane offsets covering [-theta_max, theta_max]^2, in raster order
/// (j outer, i inner, both ascending).
struct OffsetGrid {
  double theta_max = 0;
  double interval = kGridInterval;
  int half = 0;  ///< grid indices run over [-half, half]
  std::vector<GridPoint> points;

  std::size_t size() const { return points.size(); }
};

/// Throws DomainError unless 0 <= theta_max < pi/2 and interval > 0.
OffsetGrid sample_offset_grid(double theta_max, double interval = kGridInterval);

/// Indices into grid.points by Chebyshev ring, each ring clockwise from (ring, 0).
std::vector<std::size_t> bfs_order(const OffsetGrid& grid);

/// Visited flags over the out-of-plane chart, with cells a third of the grid
/// interval centred on the grid points.
class VisitTable {
 public:
  explicit VisitTable(const OffsetGrid& grid);

  double cell_size() const { return cell_; }
  int cells_per_axis() const { return 2 * half_ + 1; }

  /// Cell containing omega, or nullopt outside the table.
  std::optional<std::pair<int, int>> cell_of(const OutOfPlaneParam& omega) const;
  bool visited(std::pair<int, int> cell) const;
  /// True when a path other than `path` marked the cell.
  bool visited_by_other(std::pair<int, int> cell, int path) const;
  /// Records `path` (> 0) as the first visitor of the cell.
  void mark(std::pair<int, int> cell, int path = 1);
  std::size_t marked_count() const;
  void clear();

 private:
  std::size_t index(std::pair<int, int> cell) const;

  double cell_ = 0;
  int half_ = 0;
  std::vector<int> flags_;  ///< first visiting path, 0 when unvisited
};

/// Out-of-plane chart coordinates of R relative to R0: grid point (i, j)
/// applied to R0 lands on (i, j) * interval. Throws DomainError when the
/// relative view direction leaves the front hemisphere.
OutOfPlaneParam omega_coordinates(const Matrix3d& R, const Matrix3d& R0);

struct InnerResult : LocalResult {
  bool path_terminated = false;
};

/// local_updates with path pre-termination against `visits` (may be null).
/// `path` identifies this run in the table; only cells first visited by
/// another run stop it.
InnerResult inner_local_updates(const Pose& pose_init, const SearchLineField& field, const TemplateSet& templates,
                                const CameraIntrinsics& K, const OptimizerConfig& config, VisitTable* visits,
                                const Matrix3d& R0, double small_step, int path = 1);

struct NonlocalConfig {
  OptimizerConfig local;                      ///< outer localUpdates
  OptimizerConfig inner{.alpha = 0.75};       ///< innerLocalUpdates
  double interval = kGridInterval;
  bool grid_pretermination = true;
  bool path_pretermination = true;
  bool near_to_far = true;
  /// Steps in the chart shorter than interval * small_step_ratio never trigger path pre-termination.
  double small_step_ratio = 1.0 / 6.0;
};

struct NonlocalResult {
  Pose pose;
  double error = std::numeric_limits<double>::infinity();
  double initial_error = std::numeric_limits<double>::infinity();  ///< after the first localUpdates
  double search_error = std::numeric_limits<double>::infinity();   ///< best before the final refinement
  Pose search_pose;
  int iterations = 0;          ///< pose updates over all local optimisations
  int inner_invocations = 0;
  int local_calls = 0;
  int path_terminations = 0;
  bool searched = false;
};

NonlocalResult track_nonlocal(const Pose& pose_prev, const SearchLineField& field, const TemplateSet& templates,
                              const CameraIntrinsics& K, const NonlocalConfig& config, double e_T, double theta_T);

struct AdaptiveThresholds {
  std::deque<double> error_history;
  std::deque<double> disp_history;
  double e_T = std::numeric_limits<double>::infinity();
  double theta_T = std::numbers::pi / 6;

  std::size_t error_window = 15;
  std::size_t disp_window = 5;
  double theta_floor = std::numbers::pi / 12;
  double theta_ceiling = 80.0 * std::numbers::pi / 180.0;
  double theta_default = std::numbers::pi / 6;
};

/// Pushes a frame's matching error and rotation displacement and recomputes
/// e^T and theta^T. Non-finite values are not recorded.
AdaptiveThresholds adapt_thresholds(AdaptiveThresholds state, double error, double displacement);

double median(std::vector<double> values);

}  // namespace nlt
