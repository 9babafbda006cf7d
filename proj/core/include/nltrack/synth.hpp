#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "nltrack/dataset.hpp"
#include "nltrack/mesh.hpp"

namespace nlt {

enum class BackgroundMode { solid, noise, texture };

BackgroundMode parse_background(const std::string& name);
std::string to_string(BackgroundMode mode);

/// Synthetic sequence description. Every frame rotates the object about its
/// origin by exactly `rotation_deg` and translates it by `translation` metres.
struct SynthSpec {
  std::string name = "synthetic";
  int frames = 100;
  int width = 640;
  int height = 480;
  double focal = 500;
  double depth = 0.5;              ///< initial distance along the optical axis (m)
  double rotation_deg = 5;
  bool out_of_plane_only = false;  ///< rotation axes perpendicular to the line of sight
  double translation = 0.01;
  BackgroundMode background = BackgroundMode::solid;
  Rgb8 background_color{50, 70, 110};
  Rgb8 object_color{210, 150, 60};
  std::filesystem::path texture;   ///< tiled for BackgroundMode::texture; procedural when empty
  double color_jitter = 0.05;      ///< per-frame relative jitter of the object colour
  double pixel_noise = 2.0;        ///< Gaussian sigma, 8-bit units
  int border_margin = 10;          ///< silhouettes must keep this distance to the image border
  std::uint64_t seed = 1;

  void validate() const;
};

CameraIntrinsics synth_camera(const SynthSpec& spec);

/// Renders the sequence in memory. Deterministic for a given spec and mesh.
/// Throws DomainError when no admissible motion keeps the object inside the frame.
Sequence synth_sequence(const SynthSpec& spec, const Mesh& mesh);

/// Flat-shaded Lambert rendering of `mesh` over `background`.
RgbImage render_shaded(const Mesh& mesh, const CameraIntrinsics& K, const Pose& pose, const RgbImage& background,
                       Rgb8 color);

}  // namespace nlt
