#include "nltrack/app.hpp"

#include "nltrack/errors.hpp"

namespace nlt {

Mesh resolve_mesh(const std::string& name_or_path, double scale) {
  if (name_or_path == "cube" || name_or_path == "sphere" || name_or_path == "gadget") {
    return make_builtin_mesh(name_or_path);
  }
  ObjOptions options;
  options.scale = scale;
  return load_mesh(name_or_path, options);
}

Workload prepare_workload(const AppConfig& config) {
  Workload w;
  Mesh mesh;
  if (config.source == "synth") {
    mesh = resolve_mesh(config.synth_mesh, 1.0);
    w.sequence = synth_sequence(config.synth, mesh);
    w.sequence.mesh_name = config.synth_mesh;
  } else {
    w.sequence = load_sequence(config.dataset_root, config.object, config.variant);
    mesh = config.mesh.empty() ? resolve_mesh(w.sequence.mesh_path.string(), config.mesh_scale)
                               : resolve_mesh(config.mesh, config.mesh_scale);
  }
  mesh.validate();
  w.mesh = std::make_shared<const Mesh>(std::move(mesh));
  if (config.method != "oracle") {
    w.templates = std::make_shared<const TemplateSet>(
        config.cache_dir.empty() ? build_templates(*w.mesh, w.sequence.K, config.templates)
                                 : load_or_build_templates(config.cache_dir, *w.mesh, w.sequence.K, config.templates));
  }
  return w;
}

std::vector<Workload> prepare_workloads(const AppConfig& config) {
  std::vector<Workload> out;
  if (config.source != "synth") {
    out.push_back(prepare_workload(config));
    return out;
  }
  out.push_back(prepare_workload(config));
  for (int i = 1; i < config.synth_sequences; ++i) {
    AppConfig c = config;
    c.synth.seed = config.synth.seed + static_cast<std::uint64_t>(i);
    c.synth.name = config.synth.name + "_" + std::to_string(i);
    Workload w;
    w.sequence = synth_sequence(c.synth, *out.front().mesh);
    w.sequence.mesh_name = config.synth_mesh;
    w.mesh = out.front().mesh;
    w.templates = out.front().templates;
    out.push_back(std::move(w));
  }
  return out;
}

std::unique_ptr<FrameTracker> make_tracker(const AppConfig& config, const Workload& workload) {
  if (config.method == "oracle") return std::make_unique<OracleTracker>(workload.sequence.gt_poses);
  return std::make_unique<ContourTracker>(Tracker(workload.mesh, workload.templates, workload.sequence.K, config.tracker));
}

std::vector<AblationVariant> default_ablation_variants() {
  using M = TrackMethod;
  return {{"naive", M::nonlocal, false, false, false}, {"gp", M::nonlocal, true, false, false},
          {"pp", M::nonlocal, false, true, false},     {"gp+pp", M::nonlocal, true, true, false},
          {"all", M::nonlocal, true, true, true},      {"local", M::local, false, false, false}};
}

std::vector<AblationRow> run_ablation(const AppConfig& config, const std::vector<Workload>& workloads,
                                      const std::vector<AblationVariant>& variants) {
  std::vector<AblationRow> rows;
  for (const auto& v : variants) {
    AppConfig c = config;
    c.method = v.method == TrackMethod::local ? "local" : "nonlocal";
    c.tracker.method = v.method;
    c.tracker.search.grid_pretermination = v.grid;
    c.tracker.search.path_pretermination = v.path;
    c.tracker.search.near_to_far = v.near_to_far;
    AblationRow row;
    row.variant = v.name;
    double successes = 0, iterations = 0, inner = 0, wall = 0;
    for (const auto& w : workloads) {
      auto tracker = make_tracker(c, w);
      const RunReport r = evaluate(w.sequence, *tracker, c.eval);
      const double n = static_cast<double>(r.frames.size());
      row.frames += static_cast<int>(r.frames.size());
      successes += r.success_rate * n;
      iterations += r.mean_iterations * n;
      inner += r.mean_inner_invocations * n;
      wall += r.mean_wall_ms * n;
    }
    if (row.frames > 0) {
      row.success_rate = successes / row.frames;
      row.mean_iterations = iterations / row.frames;
      row.mean_inner_invocations = inner / row.frames;
      row.mean_wall_ms = wall / row.frames;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nlt
