#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nltrack/evaluate.hpp"

namespace nlt {

inline constexpr int kReportSchemaVersion = 1;

/// JSON document of a run. Non-finite numbers are written as null.
std::string report_to_json(const RunReport& report, bool include_frames = true);

/// One summary row per report.
void print_report_table(std::ostream& out, const std::vector<RunReport>& reports);

struct AblationRow {
  std::string variant;
  double success_rate = 0;
  double mean_iterations = 0;
  double mean_inner_invocations = 0;
  double mean_wall_ms = 0;
  int frames = 0;
};

std::string ablation_to_json(const std::vector<AblationRow>& rows);
void print_ablation_table(std::ostream& out, const std::vector<AblationRow>& rows);

}  // namespace nlt
