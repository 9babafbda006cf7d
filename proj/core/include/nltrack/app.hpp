#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nltrack/config.hpp"
#include "nltrack/report.hpp"

namespace nlt {

/// Sequence plus the mesh and templates it is tracked with.
struct Workload {
  Sequence sequence;
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const TemplateSet> templates;
};

/// Built-in mesh name or OBJ path (scaled by `scale`).
Mesh resolve_mesh(const std::string& name_or_path, double scale = 1.0);

/// Loads or synthesises the configured sequence and builds (or loads cached) templates.
Workload prepare_workload(const AppConfig& config);

/// One workload per synthetic sequence (seeds seed, seed + 1, ...), or the dataset sequence.
/// Templates are built once and shared when all sequences use the same camera.
std::vector<Workload> prepare_workloads(const AppConfig& config);

/// Tracker named by config.method ("oracle" replays ground truth).
std::unique_ptr<FrameTracker> make_tracker(const AppConfig& config, const Workload& workload);

/// Search-strategy variants compared by the ablation.
struct AblationVariant {
  std::string name;
  TrackMethod method = TrackMethod::nonlocal;
  bool grid = false, path = false, near_to_far = false;
};

/// naive, gp, pp, gp+pp, all, local.
std::vector<AblationVariant> default_ablation_variants();

std::vector<AblationRow> run_ablation(const AppConfig& config, const std::vector<Workload>& workloads,
                                      const std::vector<AblationVariant>& variants);

}  // namespace nlt
