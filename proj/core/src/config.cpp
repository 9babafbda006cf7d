#include "nltrack/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "nltrack/errors.hpp"

namespace nlt {

namespace {

namespace pt = boost::property_tree;

constexpr double kDeg = std::numbers::pi / 180.0;

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

// Reads typed values and remembers which keys were consumed.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <typename T>
  void get(const std::string& key, T& value) {
    used_.insert(key);
    const auto node = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!node) return;
    const std::string text = trim(*node);
    if constexpr (std::is_same_v<T, bool>) {
      if (text == "true" || text == "1" || text == "yes" || text == "on") value = true;
      else if (text == "false" || text == "0" || text == "no" || text == "off") value = false;
      else fail(key, text);
    } else if constexpr (std::is_same_v<T, std::string>) {
      value = text;
    } else {
      std::istringstream in(text);
      T parsed{};
      if (!(in >> parsed) || !(in >> std::ws).eof()) fail(key, text);
      value = parsed;
    }
  }

  void get_path(const std::string& key, std::filesystem::path& value, const std::filesystem::path& base) {
    std::string text;
    get(key, text);
    if (text.empty()) return;
    const std::filesystem::path p(text);
    value = p.is_absolute() || base.empty() ? p : base / p;
  }

  void get_deg(const std::string& key, double& radians) {
    double deg = radians / kDeg;
    get(key, deg);
    radians = deg * kDeg;
  }

  void get_rgb(const std::string& key, Rgb8& value) {
    std::string text;
    get(key, text);
    if (text.empty()) return;
    std::istringstream in(text);
    int r, g, b;
    char c1, c2;
    if (!(in >> r >> c1 >> g >> c2 >> b) || c1 != ',' || c2 != ',' || r < 0 || g < 0 || b < 0 || r > 255 ||
        g > 255 || b > 255) {
      fail(key, text);
    }
    value = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g), static_cast<std::uint8_t>(b)};
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty()) throw ParseError("config: key '" + section + "' outside a section");
      for (const auto& [key, v] : body) {
        const std::string full = section + "." + key;
        if (!used_.count(full)) throw ParseError("config: unknown key '" + full + "'");
      }
    }
  }

 private:
  [[noreturn]] static void fail(const std::string& key, const std::string& text) {
    throw ParseError("config: bad value '" + text + "' for '" + key + "'");
  }

  const pt::ptree& tree_;
  std::set<std::string> used_;
};

// Reads or writes every key through the same visitor so that parsing and
// dumping cannot drift apart.
template <typename Visit>
void visit_keys(AppConfig& c, Visit&& v) {
  v.str("sequence.source", c.source);

  v.path("dataset.root", c.dataset_root);
  v.str("dataset.object", c.object);
  v.str("dataset.variant", c.variant);
  v.str("dataset.mesh", c.mesh);
  v.num("dataset.mesh_scale", c.mesh_scale);

  auto& s = c.synth;
  v.str("synth.name", s.name);
  v.str("synth.mesh", c.synth_mesh);
  v.path("synth.output", c.synth_output);
  v.num("synth.sequences", c.synth_sequences);
  v.num("synth.frames", s.frames);
  v.num("synth.width", s.width);
  v.num("synth.height", s.height);
  v.num("synth.focal", s.focal);
  v.num("synth.depth", s.depth);
  v.num("synth.rotation_deg", s.rotation_deg);
  v.flag("synth.out_of_plane_only", s.out_of_plane_only);
  v.num("synth.translation", s.translation);
  v.background("synth.background", s.background);
  v.rgb("synth.background_color", s.background_color);
  v.rgb("synth.object_color", s.object_color);
  v.path("synth.texture", s.texture);
  v.num("synth.color_jitter", s.color_jitter);
  v.num("synth.pixel_noise", s.pixel_noise);
  v.num("synth.border_margin", s.border_margin);

  v.num("templates.views", c.templates.view_count);
  v.num("templates.points", c.templates.points_per_view);
  v.num("templates.fill_ratio", c.templates.fill_ratio);
  v.path("templates.cache_dir", c.cache_dir);

  auto& t = c.tracker;
  v.str("tracker.method", c.method);
  v.num("tracker.roi_margin", t.roi_margin);

  v.num("histogram.bins", t.histograms.bins_per_channel);
  v.num("histogram.learn_rate_fg", t.histograms.learn_rate_fg);
  v.num("histogram.learn_rate_bg", t.histograms.learn_rate_bg);
  v.num("histogram.band_margin", t.histograms.band_margin);
  v.flag("histogram.strict", t.histograms.strict);

  v.num("searchlines.directions", t.lines.directions);
  v.num("searchlines.candidates", t.lines.max_candidates);
  v.num("searchlines.nms_radius", t.lines.nms_radius);
  v.flag("searchlines.parallel", t.lines.parallel);

  auto& n = t.search;
  v.num("optimizer.alpha", n.local.alpha);
  v.num("optimizer.inner_alpha", n.inner.alpha);
  v.num("optimizer.error_alpha", n.local.error_alpha);
  v.num("optimizer.max_iters", n.local.max_iters);
  v.num("optimizer.view_refresh_every", n.local.view_refresh_every);
  v.num("optimizer.step_eps", n.local.step_eps);
  v.num("optimizer.psi_guard", n.local.psi_guard);
  v.num("optimizer.max_rotation_step", n.local.max_rotation_step);
  v.num("optimizer.max_translation_step", n.local.max_translation_step);

  v.deg("nonlocal.interval_deg", n.interval);
  v.flag("nonlocal.grid_pretermination", n.grid_pretermination);
  v.flag("nonlocal.path_pretermination", n.path_pretermination);
  v.flag("nonlocal.near_to_far", n.near_to_far);
  v.num("nonlocal.small_step_ratio", n.small_step_ratio);
  v.num("nonlocal.error_window", t.thresholds.error_window);
  v.num("nonlocal.displacement_window", t.thresholds.disp_window);
  v.deg("nonlocal.theta_floor_deg", t.thresholds.theta_floor);
  v.deg("nonlocal.theta_ceiling_deg", t.thresholds.theta_ceiling);
  v.deg("nonlocal.theta_default_deg", t.thresholds.theta_default);

  v.num("eval.frame_step", c.eval.frame_step);
  v.num("eval.trans_threshold", c.eval.trans_threshold);
  v.num("eval.rot_threshold_deg", c.eval.rot_threshold_deg);
  v.flag("eval.reset_on_failure", c.eval.reset_on_failure);

  v.path("output.dir", c.output_dir);
  v.flag("output.overlays", c.overlays);

  v.num("general.seed", c.seed);
}

struct ReadVisitor {
  Reader& r;
  const std::filesystem::path& base;
  void str(const std::string& k, std::string& v) { r.get(k, v); }
  void path(const std::string& k, std::filesystem::path& v) { r.get_path(k, v, base); }
  template <typename T>
  void num(const std::string& k, T& v) { r.get(k, v); }
  void flag(const std::string& k, bool& v) { r.get(k, v); }
  void deg(const std::string& k, double& v) { r.get_deg(k, v); }
  void rgb(const std::string& k, Rgb8& v) { r.get_rgb(k, v); }
  void background(const std::string& k, BackgroundMode& v) {
    std::string text = to_string(v);
    r.get(k, text);
    v = parse_background(text);
  }
};

struct DumpVisitor {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  std::vector<std::string> order;
  void put(const std::string& k, std::string value) {
    const auto dot = k.find('.');
    const std::string sec = k.substr(0, dot);
    if (!sections.count(sec)) order.push_back(sec);
    sections[sec].emplace_back(k.substr(dot + 1), std::move(value));
  }
  void str(const std::string& k, std::string& v) { put(k, v); }
  void path(const std::string& k, std::filesystem::path& v) { put(k, v.string()); }
  template <typename T>
  void num(const std::string& k, T& v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    put(k, out.str());
  }
  void flag(const std::string& k, bool& v) { put(k, v ? "true" : "false"); }
  void deg(const std::string& k, double& v) {
    double d = v / kDeg;
    num(k, d);
  }
  void rgb(const std::string& k, Rgb8& v) {
    put(k, std::to_string(v.r) + "," + std::to_string(v.g) + "," + std::to_string(v.b));
  }
  void background(const std::string& k, BackgroundMode& v) { put(k, to_string(v)); }
};

void validate(const AppConfig& c) {
  if (c.source != "synth" && c.source != "dataset") throw ParseError("config: sequence.source must be synth or dataset");
  if (c.method != "nonlocal" && c.method != "local" && c.method != "oracle") {
    throw ParseError("config: tracker.method must be nonlocal, local or oracle");
  }
  if (c.source == "dataset" && (c.dataset_root.empty() || c.object.empty())) {
    throw ParseError("config: dataset.root and dataset.object are required for a dataset source");
  }
  if (c.templates.view_count < 1 || c.templates.points_per_view < 1) throw ParseError("config: template counts must be >= 1");
  if (c.synth_sequences < 1) throw ParseError("config: synth.sequences must be >= 1");
  if (c.tracker.roi_margin < 0) throw ParseError("config: tracker.roi_margin must be >= 0");
  if (c.tracker.histograms.bins_per_channel < 1 || c.tracker.histograms.bins_per_channel > 256) {
    throw ParseError("config: histogram.bins must lie in [1, 256]");
  }
  if (c.tracker.thresholds.error_window < 1 || c.tracker.thresholds.disp_window < 1) {
    throw ParseError("config: threshold windows must be >= 1");
  }
  try {
    c.synth.validate();
    c.eval.validate();
    c.tracker.search.local.validate();
    c.tracker.search.inner.validate();
  } catch (const DomainError& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

}  // namespace

AppConfig parse_config(std::istream& in, const std::vector<std::string>& overrides,
                       const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config: " + std::string(e.what()));
  }
  for (const std::string& o : overrides) {
    const auto eq = o.find('=');
    const std::string key = trim(o.substr(0, eq));
    if (eq == std::string::npos || key.find('.') == std::string::npos) {
      throw ParseError("override '" + o + "' is not section.key=value");
    }
    tree.put(pt::ptree::path_type(key, '.'), trim(o.substr(eq + 1)));
  }

  AppConfig config;
  Reader reader(tree);
  ReadVisitor visitor{reader, base_dir};
  visit_keys(config, visitor);
  reader.reject_unknown();

  // the inner optimiser shares everything but alpha with the outer one
  const double inner_alpha = config.tracker.search.inner.alpha;
  config.tracker.search.inner = config.tracker.search.local;
  config.tracker.search.inner.alpha = inner_alpha;
  config.tracker.method = config.method == "local" ? TrackMethod::local : TrackMethod::nonlocal;
  config.synth.seed = config.seed;
  config.templates.seed = config.seed;
  validate(config);
  return config;
}

AppConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_config(in, overrides, path.parent_path());
}

std::string dump_config(const AppConfig& config) {
  AppConfig copy = config;
  DumpVisitor d;
  visit_keys(copy, d);
  std::ostringstream out;
  for (const auto& sec : d.order) {
    out << '[' << sec << "]\n";
    for (const auto& [k, v] : d.sections[sec]) out << k << " = " << v << '\n';
    out << '\n';
  }
  return out.str();
}

}  // namespace nlt
