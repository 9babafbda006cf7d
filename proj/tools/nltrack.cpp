#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "nltrack/app.hpp"
#include "nltrack/errors.hpp"
#include "nltrack/overlay.hpp"

namespace fs = std::filesystem;
using namespace nlt;

namespace {

struct CommonArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string output_key = "output.dir";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("config", args.config, "INI configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--set,-s", args.overrides, "Override a key, e.g. --set tracker.method=local")
      ->type_name("SECTION.KEY=VALUE");
  cmd->add_option("--seed", args.seed, "Seed for every stochastic step");
  cmd->add_option("--out,-o", args.output, "Output directory (overrides " + args.output_key + ")");
}

AppConfig load(const CommonArgs& args) {
  std::vector<std::string> overrides = args.overrides;
  if (args.seed) overrides.push_back("general.seed=" + std::to_string(*args.seed));
  if (!args.output.empty()) overrides.push_back(args.output_key + "=" + fs::absolute(args.output).string());
  return load_config(args.config, overrides);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string frame_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

int run_track(const CommonArgs& args) {
  const AppConfig config = load(args);
  std::vector<RunReport> reports;
  for (const Workload& w : prepare_workloads(config)) {
    auto tracker = make_tracker(config, w);
    const fs::path dir = config.output_dir / w.sequence.name;
    fs::create_directories(dir);

    FrameObserver observer;
    auto* contour = dynamic_cast<ContourTracker*>(tracker.get());
    if (config.overlays && contour) {
      fs::create_directories(dir / "overlays");
      observer = [&, contour](const RgbImage& frame, const FrameRecord& rec) {
        const auto& view = w.templates->nearest_view(rec.pose);
        const RgbImage img = draw_overlay(frame, view, rec.pose, w.sequence.K, contour->tracker().last_field().get());
        write_png(dir / "overlays" / (frame_name(rec.frame) + ".png"), img);
      };
    }
    std::vector<Pose> log;
    reports.push_back(evaluate(w.sequence, *tracker, config.eval, &log, observer));
    write_pose_log(dir / "poses.txt", log);
    write_text(dir / "report.json", report_to_json(reports.back()));
  }
  print_report_table(std::cout, reports);
  return 0;
}

int run_eval(const CommonArgs& args, const std::string& poses, bool json) {
  AppConfig config = load(args);
  if (!poses.empty()) config.method = "oracle";  // templates are not needed for a replay
  const auto workloads = prepare_workloads(config);
  if (!poses.empty() && workloads.size() != 1) throw DomainError("--poses needs exactly one sequence");
  std::vector<RunReport> reports;
  for (const Workload& w : workloads) {
    std::unique_ptr<FrameTracker> tracker =
        poses.empty() ? make_tracker(config, w) : std::make_unique<ReplayTracker>(read_pose_log(poses));
    reports.push_back(evaluate(w.sequence, *tracker, config.eval));
    write_text(config.output_dir / w.sequence.name / "report.json", report_to_json(reports.back()));
  }
  if (json) {
    for (const auto& r : reports) std::cout << report_to_json(r, false) << "\n";
  } else {
    print_report_table(std::cout, reports);
  }
  return 0;
}

int run_synth(const CommonArgs& args) {
  const AppConfig config = load(args);
  const Mesh mesh = resolve_mesh(config.synth_mesh, 1.0);
  Mesh mm = mesh;
  for (auto& v : mm.vertices) v *= 1000.0;
  for (int i = 0; i < config.synth_sequences; ++i) {
    SynthSpec spec = config.synth;
    spec.seed = config.synth.seed + static_cast<std::uint64_t>(i);
    if (i > 0) spec.name += "_" + std::to_string(i);
    const Sequence seq = synth_sequence(spec, mesh);
    write_sequence(config.synth_output, spec.name, config.variant, seq);
    save_obj(config.synth_output / spec.name / (spec.name + ".obj"), mm);
    std::cout << "wrote " << seq.size() << " frames to " << (config.synth_output / spec.name).string() << "\n";
  }
  return 0;
}

int run_ablate(const CommonArgs& args, const std::vector<std::string>& names, bool json) {
  const AppConfig config = load(args);
  std::vector<AblationVariant> variants = default_ablation_variants();
  if (!names.empty()) {
    std::vector<AblationVariant> all = variants;
    all.push_back({"n2f", TrackMethod::nonlocal, false, false, true});
    variants.clear();
    for (const auto& n : names) {
      auto it = std::find_if(all.begin(), all.end(), [&](const auto& v) { return v.name == n; });
      if (it == all.end()) throw DomainError("unknown ablation variant '" + n + "'");
      variants.push_back(*it);
    }
  }
  const auto rows = run_ablation(config, prepare_workloads(config), variants);
  write_text(config.output_dir / "ablation.json", ablation_to_json(rows));
  if (json) {
    std::cout << ablation_to_json(rows) << "\n";
  } else {
    print_ablation_table(std::cout, rows);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-local 6-DoF contour tracker", "nltrack"};
  app.require_subcommand(0, 1);

  CommonArgs track_args, eval_args, synth_args, ablate_args;
  std::string poses;
  std::vector<std::string> variants;
  bool eval_json = false, ablate_json = false;

  auto* track = app.add_subcommand("track", "Track the configured sequences and write poses, reports and overlays");
  add_common(track, track_args);
  auto* eval = app.add_subcommand("eval", "Evaluate a tracker (or a recorded pose log) with the 5cm-5deg criterion");
  add_common(eval, eval_args);
  eval->add_option("--poses", poses, "Replay this pose log instead of tracking")->check(CLI::ExistingFile);
  eval->add_flag("--json", eval_json, "Print the report JSON instead of the table");
  synth_args.output_key = "synth.output";
  auto* synth = app.add_subcommand("synth", "Render synthetic sequences to disk in the benchmark layout");
  add_common(synth, synth_args);
  auto* ablate = app.add_subcommand("ablate", "Compare search strategies by iterations and accuracy");
  add_common(ablate, ablate_args);
  ablate->add_option("--variants", variants, "Subset of naive, gp, pp, n2f, gp+pp, all, local");
  ablate->add_flag("--json", ablate_json, "Print the ablation JSON instead of the table");

  if (argc < 2) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*track) return run_track(track_args);
    if (*eval) return run_eval(eval_args, poses, eval_json);
    if (*synth) return run_synth(synth_args);
    if (*ablate) return run_ablate(ablate_args, variants, ablate_json);
  } catch (const nlt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
