#include "nltrack/dataset.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nltrack/errors.hpp"

namespace nlt {

namespace {

std::string where(const std::filesystem::path& path, int line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

bool parse_double(std::string_view token, double& value) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

std::string frame_name(const std::string& prefix, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04zu", i);
  return prefix + buf + ".png";
}

}  // namespace

RgbImage Sequence::frame(std::size_t i) const {
  if (!frames.empty()) return frames.at(i);
  return read_png(frame_paths.at(i));
}

void Sequence::validate() const {
  if (size() < 2) throw DomainError("sequence '" + name + "' needs at least 2 frames");
  if (gt_poses.size() != size()) {
    throw DomainError("sequence '" + name + "' has " + std::to_string(size()) + " frames but " +
                      std::to_string(gt_poses.size()) + " poses");
  }
  K.validate();
}

std::string variant_prefix(const std::string& variant) {
  if (variant == "regular") return "a_regular";
  if (variant == "dynamiclight") return "b_dynamiclight";
  if (variant == "noisy") return "c_noisy";
  if (variant == "occlusion") return "d_occlusion";
  return variant;
}

std::vector<Pose> read_pose_file(const std::filesystem::path& path, double translation_scale) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pose file " + path.string());
  std::vector<Pose> poses;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokens(line);
    if (tok.empty()) continue;
    double first = 0;
    if (!parse_double(tok[0], first)) {
      if (poses.empty()) continue;  // header
      throw ParseError(where(path, lineno) + "malformed number '" + tok[0] + "'");
    }
    if (tok.size() == 1 && poses.empty()) continue;  // count line
    if (tok.size() != 12) {
      throw ParseError(where(path, lineno) + "expected 12 numbers, found " + std::to_string(tok.size()));
    }
    double v[12];
    for (int k = 0; k < 12; ++k) {
      if (!parse_double(tok[k], v[k])) throw ParseError(where(path, lineno) + "malformed number '" + tok[k] + "'");
    }
    Pose p;
    p.R << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    p.t = Vector3d(v[9], v[10], v[11]) * translation_scale;
    poses.push_back(p);
  }
  return poses;
}

void write_pose_file(const std::filesystem::path& path, const std::vector<Pose>& poses, double translation_scale) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write pose file " + path.string());
  char buf[64];
  for (const Pose& p : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        std::snprintf(buf, sizeof(buf), "%.17g ", p.R(r, c));
        out << buf;
      }
    }
    for (int k = 0; k < 3; ++k) {
      std::snprintf(buf, sizeof(buf), k < 2 ? "%.17g " : "%.17g", p.t[k] / translation_scale);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

CameraIntrinsics read_calibration(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("missing camera calibration " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokens(line);
    double v[4];
    if (tok.empty() || !parse_double(tok[0], v[0])) continue;
    if (tok.size() < 4) throw ParseError(where(path, lineno) + "expected fx fy cx cy");
    for (int k = 1; k < 4; ++k) {
      if (!parse_double(tok[k], v[k])) throw ParseError(where(path, lineno) + "malformed number '" + tok[k] + "'");
    }
    CameraIntrinsics K;
    K.fx = v[0], K.fy = v[1], K.cx = v[2], K.cy = v[3];
    return K;
  }
  throw ParseError(path.string() + ": no calibration line");
}

void write_calibration(const std::filesystem::path& path, const CameraIntrinsics& K) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[160];
  std::snprintf(buf, sizeof(buf), "fx fy cx cy k1 k2 p1 p2\n%.17g %.17g %.17g %.17g 0 0 0 0\n", K.fx, K.fy, K.cx, K.cy);
  out << buf;
}

Sequence load_sequence(const std::filesystem::path& root, const std::string& object, const std::string& variant) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw IoError("dataset root " + root.string() + " is not a directory");
  const fs::path object_dir = root / object;
  if (!fs::is_directory(object_dir)) throw IoError("object directory " + object_dir.string() + " not found");

  Sequence seq;
  seq.name = object + "/" + variant;
  const std::string prefix = variant_prefix(variant);
  for (std::size_t i = 0;; ++i) {
    fs::path p = object_dir / "frames" / frame_name(prefix, i);
    if (!fs::exists(p)) break;
    seq.frame_paths.push_back(std::move(p));
  }
  if (seq.frame_paths.empty()) throw IoError("no frames " + prefix + "NNNN.png under " + (object_dir / "frames").string());

  const fs::path local_poses = object_dir / "poses_first.txt";
  seq.gt_poses = read_pose_file(fs::exists(local_poses) ? local_poses : root / "poses_first.txt");
  seq.K = read_calibration(root / "camera_calibration.txt");
  const RgbImage first = read_png(seq.frame_paths.front());
  seq.K.width = first.width();
  seq.K.height = first.height();
  seq.mesh_path = object_dir / (object + ".obj");
  seq.validate();
  return seq;
}

void write_sequence(const std::filesystem::path& root, const std::string& object, const std::string& variant,
                    const Sequence& sequence) {
  namespace fs = std::filesystem;
  const fs::path frames = root / object / "frames";
  fs::create_directories(frames);
  const std::string prefix = variant_prefix(variant);
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const fs::path dst = frames / frame_name(prefix, i);
    if (!sequence.frames.empty()) {
      write_png(dst, sequence.frames[i]);
    } else {
      fs::copy_file(sequence.frame_paths[i], dst, fs::copy_options::overwrite_existing);
    }
  }
  write_pose_file(root / object / "poses_first.txt", sequence.gt_poses);
  write_calibration(root / "camera_calibration.txt", sequence.K);
}

}  // namespace nlt
