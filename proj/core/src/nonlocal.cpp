#include "nltrack/nonlocal.hpp"

#include <algorithm>
#include <cmath>

#include "nltrack/errors.hpp"

namespace nlt {

OffsetGrid sample_offset_grid(double theta_max, double interval) {
  if (!(theta_max >= 0 && theta_max < std::numbers::pi / 2)) throw DomainError("theta_max must lie in [0, pi/2)");
  if (!(interval > 0)) throw DomainError("grid interval must be positive");
  OffsetGrid grid;
  grid.theta_max = theta_max;
  grid.interval = interval;
  grid.half = static_cast<int>(std::floor(theta_max / interval + 1e-9));
  for (int j = -grid.half; j <= grid.half; ++j) {
    for (int i = -grid.half; i <= grid.half; ++i) {
      GridPoint p;
      p.i = i;
      p.j = j;
      p.theta = {i * interval, j * interval};
      p.delta = (i == 0 && j == 0) ? Matrix3d::Identity()
                                   : minimal_rotation(Vector3d::UnitZ(), direction_from_theta(p.theta));
      grid.points.push_back(p);
    }
  }
  return grid;
}

std::vector<std::size_t> bfs_order(const OffsetGrid& grid) {
  std::vector<std::size_t> order(grid.points.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  auto key = [&](std::size_t k) {
    const auto& p = grid.points[k];
    const int ring = std::max(std::abs(p.i), std::abs(p.j));
    double a = std::atan2(static_cast<double>(p.j), static_cast<double>(p.i));
    if (a < 0) a += 2 * std::numbers::pi;
    return std::pair{ring, a};
  };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return order;
}

VisitTable::VisitTable(const OffsetGrid& grid)
    : cell_(grid.interval / 3), half_(3 * grid.half + 1),
      flags_(static_cast<std::size_t>(2 * half_ + 1) * (2 * half_ + 1), 0) {}

std::optional<std::pair<int, int>> VisitTable::cell_of(const OutOfPlaneParam& omega) const {
  const double ci = std::round(omega.theta_x / cell_);
  const double cj = std::round(omega.theta_y / cell_);
  if (!(std::abs(ci) <= half_ && std::abs(cj) <= half_)) return std::nullopt;
  return std::pair{static_cast<int>(ci), static_cast<int>(cj)};
}

std::size_t VisitTable::index(std::pair<int, int> cell) const {
  return static_cast<std::size_t>(cell.second + half_) * (2 * half_ + 1) + (cell.first + half_);
}

bool VisitTable::visited(std::pair<int, int> cell) const { return flags_[index(cell)] != 0; }
bool VisitTable::visited_by_other(std::pair<int, int> cell, int path) const {
  const int owner = flags_[index(cell)];
  return owner != 0 && owner != path;
}
void VisitTable::mark(std::pair<int, int> cell, int path) {
  int& owner = flags_[index(cell)];
  if (owner == 0) owner = path;
}
std::size_t VisitTable::marked_count() const {
  return static_cast<std::size_t>(std::count_if(flags_.begin(), flags_.end(), [](int v) { return v != 0; }));
}
void VisitTable::clear() { std::fill(flags_.begin(), flags_.end(), 0); }

OutOfPlaneParam omega_coordinates(const Matrix3d& R, const Matrix3d& R0) {
  const Vector3d v = (R * R0.transpose()).transpose() * Vector3d::UnitZ();
  const OutOfPlaneParam t = theta_from_direction(v);
  return {-t.theta_x, -t.theta_y};
}

InnerResult inner_local_updates(const Pose& pose_init, const SearchLineField& field, const TemplateSet& templates,
                                const CameraIntrinsics& K, const OptimizerConfig& config, VisitTable* visits,
                                const Matrix3d& R0, double small_step, int path) {
  InnerResult out;
  if (!visits) {
    static_cast<LocalResult&>(out) = local_updates(pose_init, field, templates, K, config);
    return out;
  }

  bool marking = true;
  OutOfPlaneParam last{};
  std::optional<std::pair<int, int>> last_cell;
  try {
    last = omega_coordinates(pose_init.R, R0);
    last_cell = visits->cell_of(last);
    if (last_cell) visits->mark(*last_cell, path);
  } catch (const DomainError&) {
    marking = false;
  }

  bool terminated = false;
  const StepObserver observer = [&](const Pose&, const Pose& after) {
    if (!marking) return true;
    OutOfPlaneParam now;
    try {
      now = omega_coordinates(after.R, R0);
    } catch (const DomainError&) {
      marking = false;
      return true;
    }
    const double step = std::hypot(now.theta_x - last.theta_x, now.theta_y - last.theta_y);
    const auto cell = visits->cell_of(now);
    last = now;
    if (!cell) {
      last_cell.reset();
      return true;
    }
    const bool entered = !last_cell || *cell != *last_cell;
    last_cell = cell;
    if (entered && step >= small_step && visits->visited_by_other(*cell, path)) {
      terminated = true;
      return false;
    }
    visits->mark(*cell, path);
    return true;
  };
  static_cast<LocalResult&>(out) = local_updates(pose_init, field, templates, K, config, observer);
  out.path_terminated = terminated;
  return out;
}

NonlocalResult track_nonlocal(const Pose& pose_prev, const SearchLineField& field, const TemplateSet& templates,
                              const CameraIntrinsics& K, const NonlocalConfig& config, double e_T, double theta_T) {
  NonlocalResult result;
  const LocalResult first = local_updates(pose_prev, field, templates, K, config.local);
  result.local_calls = 1;
  result.iterations = first.iterations;
  result.initial_error = first.error;

  Pose best = first.pose;
  double err = first.error;
  const bool gate = config.grid_pretermination ? err > e_T : true;
  if (gate && std::isfinite(err)) {
    result.searched = true;
    const Matrix3d R0 = best.R;
    const Vector3d t = best.t;
    const OffsetGrid grid = sample_offset_grid(std::min(theta_T, std::nextafter(std::numbers::pi / 2, 0.0)),
                                               config.interval);
    std::vector<std::size_t> order;
    if (config.near_to_far) {
      order = bfs_order(grid);
    } else {
      order.resize(grid.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    }
    VisitTable visits(grid);
    const double small_step = config.interval * config.small_step_ratio;

    for (std::size_t k : order) {
      const Pose start{grid.points[k].delta * R0, t};
      const InnerResult inner = inner_local_updates(start, field, templates, K, config.inner,
                                                    config.path_pretermination ? &visits : nullptr, R0, small_step,
                                                    result.inner_invocations + 1);
      ++result.inner_invocations;
      result.iterations += inner.iterations;
      if (inner.path_terminated) ++result.path_terminations;
      if (inner.error < err) {
        err = inner.error;
        best = inner.pose;
      }
      if (config.grid_pretermination && err < e_T) break;
    }
  }
  result.search_error = err;
  result.search_pose = best;

  const LocalResult last = local_updates(best, field, templates, K, config.local);
  ++result.local_calls;
  result.iterations += last.iterations;
  result.pose = last.pose;
  result.error = last.error;
  return result;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double hi = values[mid];
  if (values.size() % 2 == 1) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lo + hi);
}

AdaptiveThresholds adapt_thresholds(AdaptiveThresholds state, double error, double displacement) {
  if (std::isfinite(error)) {
    state.error_history.push_back(error);
    while (state.error_history.size() > state.error_window) state.error_history.pop_front();
  }
  if (std::isfinite(displacement)) {
    state.disp_history.push_back(displacement);
    while (state.disp_history.size() > state.disp_window) state.disp_history.pop_front();
  }
  state.e_T = state.error_history.empty()
                  ? std::numeric_limits<double>::infinity()
                  : median({state.error_history.begin(), state.error_history.end()});
  state.theta_T = state.disp_history.empty()
                      ? state.theta_default
                      : std::clamp(median({state.disp_history.begin(), state.disp_history.end()}),
                                   state.theta_floor, state.theta_ceiling);
  return state;
}

}  // namespace nlt
