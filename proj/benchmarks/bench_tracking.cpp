#include <benchmark/benchmark.h>

#include <map>

#include "nltrack/nonlocal.hpp"
#include "support/fields.hpp"
#include "support/scene.hpp"

using namespace nlt;

namespace {

const testing::Scene& scene() {
  static const testing::Scene s = testing::make_scene();
  return s;
}

const ProbabilityMap& roi_map(int size) {
  static std::map<int, ProbabilityMap> cache;
  auto it = cache.find(size);
  if (it == cache.end()) {
    const auto& s = scene();
    it = cache.emplace(size, testing::silhouette_probability(*s.mesh, s.K, s.gt, testing::centred_roi(s.K, s.gt, size)))
             .first;
  }
  return it->second;
}

Pose perturbed() {
  Pose p = scene().gt;
  return apply_left((Twist() << 0.03, -0.02, 0.02, 0.004, -0.003, 0.0).finished(), p);
}

void BM_BuildField(benchmark::State& state) {
  const ProbabilityMap& map = roi_map(static_cast<int>(state.range(0)));
  SearchLineConfig config;
  config.directions = static_cast<int>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(build_field(map, config));
  state.SetLabel(std::to_string(state.range(0)) + "px ROI, D=" + std::to_string(state.range(1)));
}
BENCHMARK(BM_BuildField)->Args({320, 16})->Args({320, 8})->Args({480, 16})->Unit(benchmark::kMillisecond);

void BM_BuildFieldNoisy(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  testing::Gen gen(7);
  const ProbabilityMap map = testing::random_map(gen, Rect{0, 0, size, size});
  for (auto _ : state) benchmark::DoNotOptimize(build_field(map));
  state.SetLabel(std::to_string(size) + "px noisy map");
}
BENCHMARK(BM_BuildFieldNoisy)->Arg(320)->Unit(benchmark::kMillisecond);

void BM_PoseUpdate(benchmark::State& state) {
  const auto& s = scene();
  const SearchLineField field = build_field(roi_map(320));
  const Pose pose = perturbed();
  const TemplateView& view = s.templates->nearest_view(pose);
  for (auto _ : state) {
    const auto corr = assemble_correspondences(view, pose, field, s.K);
    benchmark::DoNotOptimize(gauss_newton_step(corr, pose, s.K, 0.125));
  }
}
BENCHMARK(BM_PoseUpdate)->Unit(benchmark::kMicrosecond);

void BM_GaussNewtonSolve(benchmark::State& state) {
  const auto& s = scene();
  const SearchLineField field = build_field(roi_map(320));
  const Pose pose = perturbed();
  const auto corr = assemble_correspondences(s.templates->nearest_view(pose), pose, field, s.K);
  for (auto _ : state) benchmark::DoNotOptimize(gauss_newton_step(corr, pose, s.K, 0.125));
  state.counters["N"] = static_cast<double>(corr.size());
}
BENCHMARK(BM_GaussNewtonSolve)->Unit(benchmark::kMicrosecond);

void BM_LocalUpdates(benchmark::State& state) {
  const auto& s = scene();
  const SearchLineField field = build_field(roi_map(320));
  const Pose pose = perturbed();
  for (auto _ : state) benchmark::DoNotOptimize(local_updates(pose, field, *s.templates, s.K));
}
BENCHMARK(BM_LocalUpdates)->Unit(benchmark::kMillisecond);

void BM_NonlocalSearch(benchmark::State& state) {
  const auto& s = scene();
  const SearchLineField field = build_field(roi_map(320));
  const Pose pose = perturbed();
  NonlocalConfig config;
  config.grid_pretermination = state.range(0) != 0;
  config.path_pretermination = state.range(0) != 0;
  config.near_to_far = state.range(0) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(track_nonlocal(pose, field, *s.templates, s.K, config, 0.0, std::numbers::pi / 6));
  }
  state.SetLabel(state.range(0) ? "all strategies" : "naive grid");
}
BENCHMARK(BM_NonlocalSearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
