#include "hairrec/scene.hpp"

#include "hairrec/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace hairrec {

namespace {

struct ConfigEntry {
  std::function<void(SceneConfig&, double)> set_number;
  std::function<void(SceneConfig&, const std::string&)> set_path;
};

const std::map<std::string, ConfigEntry>& config_entries() {
  static const std::map<std::string, ConfigEntry> entries = [] {
    std::map<std::string, ConfigEntry> m;
    auto num = [&m](const char* key, auto member) {
      m[key].set_number = [member](SceneConfig& c, double v) {
        using T = std::decay_t<decltype(c.*member)>;
        c.*member = static_cast<T>(v);
      };
    };
    auto path = [&m](const char* key, auto member) {
      m[key].set_path = [member](SceneConfig& c, const std::string& v) { c.*member = v; };
    };
    path("scene_dir", &SceneConfig::scene_dir);
    path("db_dir", &SceneConfig::db_dir);
    path("out_dir", &SceneConfig::out_dir);
    num("head_width", &SceneConfig::head_width);
    num("hull_resolution", &SceneConfig::hull_resolution);
    num("hull_bounds_scale", &SceneConfig::hull_bounds_scale);
    num("blur_area_factor", &SceneConfig::blur_area_factor);
    num("hair_prob_threshold", &SceneConfig::hair_prob_threshold);
    num("frame_bin_width", &SceneConfig::frame_bin_width);
    num("n_filters", &SceneConfig::n_filters);
    num("filter_ksize", &SceneConfig::filter_ksize);
    num("filter_wavelength", &SceneConfig::filter_wavelength);
    num("trace_step_px", &SceneConfig::trace_step_px);
    num("trace_response_frac", &SceneConfig::trace_response_frac);
    num("trace_max_turn_deg", &SceneConfig::trace_max_turn_deg);
    num("trace_min_length_px", &SceneConfig::trace_min_length_px);
    num("peak_distance", &SceneConfig::peak_distance);
    num("merge_distance", &SceneConfig::merge_distance);
    num("target_strands", &SceneConfig::target_strands);
    num("db_voxel_size", &SceneConfig::db_voxel_size);
    num("db_smooth_iters", &SceneConfig::db_smooth_iters);
    num("db_smooth_step", &SceneConfig::db_smooth_step);
    num("db_sample_spacing", &SceneConfig::db_sample_spacing);
    num("retrieve_k", &SceneConfig::retrieve_k);
    num("correct_lambda", &SceneConfig::correct_lambda);
    num("correct_sigma", &SceneConfig::correct_sigma);
    num("blend_alpha", &SceneConfig::blend_alpha);
    num("blend_sigma", &SceneConfig::blend_sigma);
    num("blend_anchors", &SceneConfig::blend_anchors);
    num("field_resolution", &SceneConfig::field_resolution);
    num("field_w1", &SceneConfig::field_w1);
    num("field_w2", &SceneConfig::field_w2);
    num("field_influence_radius", &SceneConfig::field_influence_radius);
    num("regrow_max_steps", &SceneConfig::regrow_max_steps);
    num("regrow_min_magnitude", &SceneConfig::regrow_min_magnitude);
    num("resample_count", &SceneConfig::resample_count);
    num("iou_line_width_px", &SceneConfig::iou_line_width_px);
    num("color_depth_tolerance", &SceneConfig::color_depth_tolerance);
    return m;
  }();
  return entries;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_text(SceneConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto where = origin + " line " + std::to_string(lineno);
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::Validation, where + ": expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = config_entries().find(key);
    if (it == config_entries().end())
      throw Error(ErrorKind::Validation, where + ": unknown key '" + key + "'");
    if (it->second.set_path) {
      it->second.set_path(cfg, value);
      continue;
    }
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
      throw Error(ErrorKind::Validation, where + ": bad numeric value '" + value + "'");
    it->second.set_number(cfg, v);
  }
}

SceneConfig load_config(const std::filesystem::path& path) {
  SceneConfig cfg;
  apply_config_text(cfg, read_text_file(path), path.string());
  return cfg;
}

Scene load_scene(const std::filesystem::path& root, const SceneConfig& cfg) {
  const auto require = [&](const std::filesystem::path& p) {
    if (!std::filesystem::exists(p))
      throw Error(ErrorKind::Ingest, "missing input file: " + p.string());
    return p;
  };

  Scene scene;
  auto cams = load_cameras(require(root / "cameras.txt"));
  std::sort(cams.begin(), cams.end(),
            [](const NamedCamera& a, const NamedCamera& b) { return a.frame_id < b.frame_id; });
  for (size_t i = 1; i < cams.size(); ++i) {
    if (cams[i].frame_id == cams[i - 1].frame_id)
      throw Error(ErrorKind::Validation,
                  "duplicate frame id " + std::to_string(cams[i].frame_id));
  }

  scene.head = load_obj(require(root / "head.obj"));
  if (!scene.head.has_flag("scalp_root"))
    throw Error(ErrorKind::Ingest, "head.obj: missing scalp_root flag channel");

  for (const auto& nc : cams) {
    CameraFrame f;
    f.frame_id = nc.frame_id;
    f.camera = nc.camera;
    const std::string id = std::to_string(nc.frame_id);
    f.mask = load_pgm(require(root / ("mask_" + id + ".pgm")));
    const auto prob8 = load_pgm(require(root / ("hair_prob_" + id + ".pgm")));
    f.hair_prob = FloatRaster(prob8.width(), prob8.height());
    for (int i = 0; i < prob8.width() * prob8.height(); ++i)
      f.hair_prob.data()[i] = prob8.data()[i] / 255.0f;
    f.dir_labels = load_pgm(require(root / ("dir_labels_" + id + ".pgm")));
    f.depth = load_depth(require(root / ("depth_" + id + ".dpt")));
    const auto color_path = root / ("color_" + id + ".ppm");
    if (std::filesystem::exists(color_path)) f.color = load_ppm(color_path);
    scene.frames.push_back(std::move(f));
  }

  // Normalize: head bbox center -> origin, bbox x-extent -> head_width.
  const Aabb box = scene.head.bounds();
  if (!box.valid() || box.extent().x() <= 0.0)
    throw Error(ErrorKind::DegenerateGeometry, "head mesh has no x extent");
  const double s = cfg.head_width / box.extent().x();
  const Vec3 c = box.center();
  const bool near_identity = std::abs(s - 1.0) < 1e-12 && c.norm() < 1e-12;
  if (!near_identity) {
    for (auto& v : scene.head.vertices) v = s * (v - c);
    for (auto& f : scene.frames) {
      // world' = s (world - c)  =>  t' = s t + R (s c) ... derived below.
      // X_cam = R w + t = R (w'/s + c) + t  =>  w' maps with t' = s (t + R c).
      f.camera.t = s * (f.camera.t + f.camera.R * c);
      for (int i = 0; i < f.depth.width() * f.depth.height(); ++i)
        f.depth.data()[i] = static_cast<float>(f.depth.data()[i] * s);
    }
    scene.ingest_scale = s;
  }

  for (auto& f : scene.frames) {
    f.azimuth = camera_azimuth(f.camera);
    validate_frame(f);
  }
  validate_mesh(scene.head, "head.obj");
  return scene;
}

void save_scene(const std::filesystem::path& root, const Scene& scene) {
  std::filesystem::create_directories(root);
  std::vector<NamedCamera> cams;
  cams.reserve(scene.frames.size());
  for (const auto& f : scene.frames) {
    cams.push_back({f.frame_id, f.camera});
    const std::string id = std::to_string(f.frame_id);
    save_pgm(root / ("mask_" + id + ".pgm"), f.mask);
    Raster<uint8_t> prob8(f.hair_prob.width(), f.hair_prob.height());
    for (int i = 0; i < prob8.width() * prob8.height(); ++i)
      prob8.data()[i] =
          static_cast<uint8_t>(std::lround(std::clamp(f.hair_prob.data()[i], 0.0f, 1.0f) * 255.0f));
    save_pgm(root / ("hair_prob_" + id + ".pgm"), prob8);
    save_pgm(root / ("dir_labels_" + id + ".pgm"), f.dir_labels);
    save_depth(root / ("depth_" + id + ".dpt"), f.depth);
    if (f.color) save_ppm(root / ("color_" + id + ".ppm"), *f.color);
  }
  save_cameras(root / "cameras.txt", cams);
  save_obj(root / "head.obj", scene.head);
}

}  // namespace hairrec
