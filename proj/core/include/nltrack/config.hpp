#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nltrack/evaluate.hpp"
#include "nltrack/synth.hpp"
#include "nltrack/templates.hpp"
#include "nltrack/tracker.hpp"

namespace nlt {

/// Everything a CLI run needs. Relative paths are resolved against the
/// directory of the config file.
struct AppConfig {
  std::string source = "synth";  ///< "synth" or "dataset"

  std::filesystem::path dataset_root;
  std::string object;
  std::string variant = "regular";
  std::string mesh;           ///< built-in name or OBJ path; empty uses the sequence's own mesh
  double mesh_scale = 0.001;  ///< applied to OBJ files (RBOT meshes are in millimetres)

  SynthSpec synth;
  std::string synth_mesh = "gadget";
  int synth_sequences = 1;  ///< sequence i uses seed + i
  std::filesystem::path synth_output = "synthetic";

  TemplateBuildOptions templates;
  std::filesystem::path cache_dir;  ///< template cache; empty disables caching

  std::string method = "nonlocal";  ///< nonlocal | local | oracle
  TrackerConfig tracker;
  EvalConfig eval;

  std::filesystem::path output_dir = "nltrack_out";
  bool overlays = false;
  std::uint64_t seed = 1;
};

/// Parses INI text ("[section]" headers, "key = value" lines, ';' or '#'
/// comments). `overrides` hold "section.key=value" strings applied on top.
/// Unknown sections or keys and malformed values raise ParseError.
AppConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {},
                       const std::filesystem::path& base_dir = {});
AppConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// The INI text of `config` with every key present.
std::string dump_config(const AppConfig& config);

}  // namespace nlt
