#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nltrack/geometry.hpp"
#include "nltrack/image.hpp"

namespace nlt {

/// Frames with ground truth. Frames are either file paths or held in memory.
struct Sequence {
  std::string name;
  std::vector<std::filesystem::path> frame_paths;
  std::vector<RgbImage> frames;
  std::vector<Pose> gt_poses;
  CameraIntrinsics K;
  std::filesystem::path mesh_path;  ///< OBJ file, or empty for a built-in mesh
  std::string mesh_name;            ///< built-in mesh name when mesh_path is empty

  std::size_t size() const { return frames.empty() ? frame_paths.size() : frames.size(); }
  RgbImage frame(std::size_t i) const;

  /// Throws DomainError unless there are >= 2 frames, one pose per frame and valid intrinsics.
  void validate() const;
};

/// RBOT frame-name prefix for a variant ("regular" -> "a_regular"). Full prefixes pass through.
std::string variant_prefix(const std::string& variant);

/// Reads "r11 ... r33 tx ty tz" lines. Lines starting with a non-numeric token
/// and a leading single-number count line are skipped. Translations are
/// multiplied by `translation_scale` (RBOT stores millimetres).
std::vector<Pose> read_pose_file(const std::filesystem::path& path, double translation_scale = 1e-3);
void write_pose_file(const std::filesystem::path& path, const std::vector<Pose>& poses,
                     double translation_scale = 1e-3);

/// Pose log in metres, full precision.
inline std::vector<Pose> read_pose_log(const std::filesystem::path& path) { return read_pose_file(path, 1.0); }
inline void write_pose_log(const std::filesystem::path& path, const std::vector<Pose>& poses) {
  write_pose_file(path, poses, 1.0);
}

/// First numeric line "fx fy cx cy ..." of an RBOT calibration file. Width and height stay 0.
CameraIntrinsics read_calibration(const std::filesystem::path& path);
void write_calibration(const std::filesystem::path& path, const CameraIntrinsics& K);

/// Loads <root>/<object>/frames/<prefix>NNNN.png with poses from
/// <root>/poses_first.txt (or <root>/<object>/poses_first.txt) and intrinsics
/// from <root>/camera_calibration.txt. The mesh is <root>/<object>/<object>.obj.
Sequence load_sequence(const std::filesystem::path& root, const std::string& object, const std::string& variant);

/// Writes the layout read by load_sequence. In-memory frames are encoded as PNG.
void write_sequence(const std::filesystem::path& root, const std::string& object, const std::string& variant,
                    const Sequence& sequence);

}  // namespace nlt
