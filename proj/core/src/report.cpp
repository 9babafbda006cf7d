#include "nltrack/report.hpp"

#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <ostream>

namespace nlt {

namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string report_to_json(const RunReport& report, bool include_frames) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["sequence"] = report.sequence;
  j["method"] = report.method;
  j["thresholds"] = {{"translation_m", report.config.trans_threshold},
                     {"rotation_deg", report.config.rot_threshold_deg}};
  j["frame_step"] = report.config.frame_step;
  j["reset_on_failure"] = report.config.reset_on_failure;
  j["evaluated_frames"] = report.frames.size();
  j["success_rate"] = report.success_rate;
  j["mean_iterations"] = report.mean_iterations;
  j["mean_inner_invocations"] = report.mean_inner_invocations;
  j["mean_wall_ms"] = report.mean_wall_ms;
  j["resets"] = report.resets;
  if (include_frames) {
    json frames = json::array();
    for (const auto& f : report.frames) {
      json R = json::array(), t = json::array();
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) R.push_back(f.pose.R(r, c));
      }
      for (int k = 0; k < 3; ++k) t.push_back(f.pose.t[k]);
      frames.push_back({{"frame", f.frame},
                        {"success", f.success},
                        {"rot_err_deg", f.rot_err_deg},
                        {"trans_err_m", f.trans_err},
                        {"error", number(f.error)},
                        {"iterations", f.iterations},
                        {"inner_invocations", f.inner_invocations},
                        {"wall_ms", f.wall_ms},
                        {"pose", {{"R", R}, {"t", t}}}});
    }
    j["frames"] = std::move(frames);
  }
  return j.dump(2);
}

void print_report_table(std::ostream& out, const std::vector<RunReport>& reports) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-24s %-9s %7s %9s %9s %9s %7s\n", "sequence", "method", "frames", "success",
                "iters", "ms/frame", "resets");
  out << line;
  for (const auto& r : reports) {
    std::snprintf(line, sizeof(line), "%-24s %-9s %7zu %8.1f%% %9.1f %9.2f %7d\n", r.sequence.c_str(),
                  r.method.c_str(), r.frames.size(), 100 * r.success_rate, r.mean_iterations, r.mean_wall_ms,
                  r.resets);
    out << line;
  }
}

std::string ablation_to_json(const std::vector<AblationRow>& rows) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"variant", r.variant},
                   {"success_rate", r.success_rate},
                   {"mean_iterations", r.mean_iterations},
                   {"mean_inner_invocations", r.mean_inner_invocations},
                   {"mean_wall_ms", r.mean_wall_ms},
                   {"frames", r.frames}});
  }
  j["variants"] = std::move(arr);
  return j.dump(2);
}

void print_ablation_table(std::ostream& out, const std::vector<AblationRow>& rows) {
  char line[256];
  std::snprintf(line, sizeof(line), "%-10s %9s %10s %10s %9s\n", "variant", "success", "iters", "inner", "ms/frame");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-10s %8.1f%% %10.1f %10.2f %9.2f\n", r.variant.c_str(), 100 * r.success_rate,
                  r.mean_iterations, r.mean_inner_invocations, r.mean_wall_ms);
    out << line;
  }
}

}  // namespace nlt
