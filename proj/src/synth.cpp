#include "hairrec/synth.hpp"

#include "hairrec/io.hpp"
#include "hairrec/kdtree.hpp"
#include "hairrec/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <type_traits>

namespace hairrec {

namespace {

constexpr double kGolden = 0.61803398874989485;
constexpr double kStrandSpacing = 0.002;
constexpr double kRootStandoff = 0.0005;
constexpr double kStampRadiusPx = 2.0;
constexpr double kDepthBias = 1e-5;

double deg2rad(double d) { return d * kPi / 180.0; }

}  // namespace

SynthSpec parse_synth_spec(const std::string& text, const std::string& origin) {
  SynthSpec spec;
  std::map<std::string, std::function<bool(const std::string&)>> keys;
  auto num = [&](const char* key, auto SynthSpec::* field) {
    keys[key] = [&spec, field](const std::string& v) {
      try {
        if constexpr (std::is_same_v<std::decay_t<decltype(spec.*field)>, int>)
          spec.*field = std::stoi(v);
        else if constexpr (std::is_same_v<std::decay_t<decltype(spec.*field)>, std::uint64_t>)
          spec.*field = std::stoull(v);
        else
          spec.*field = std::stod(v);
      } catch (const std::exception&) {
        return false;
      }
      return true;
    };
  };
  num("head_radius", &SynthSpec::head_radius);
  num("head_subdiv", &SynthSpec::head_subdiv);
  num("n_strands", &SynthSpec::n_strands);
  num("n_cameras", &SynthSpec::n_cameras);
  num("camera_span_deg", &SynthSpec::camera_span_deg);
  num("camera_distance", &SynthSpec::camera_distance);
  num("image_size", &SynthSpec::image_size);
  num("focal", &SynthSpec::focal);
  num("cap_angle_deg", &SynthSpec::cap_angle_deg);
  num("phi_end_deg", &SynthSpec::phi_end_deg);
  num("shell_rise", &SynthSpec::shell_rise);
  num("db_styles", &SynthSpec::db_styles);
  num("seed", &SynthSpec::seed);
  keys["color_mode"] = [&spec](const std::string& v) {
    if (v != "fibers" && v != "two_tone" && v != "uniform") return false;
    spec.color_mode = v;
    return true;
  };

  int line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw Error(ErrorKind::Validation,
                    origin + ":" + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = keys.find(key);
    if (it == keys.end())
      throw Error(ErrorKind::Validation,
                  origin + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!it->second(value))
      throw Error(ErrorKind::Validation, origin + ":" + std::to_string(line_no) +
                                             ": bad value '" + value + "' for " + key);
  }
  if (spec.head_radius <= 0.0 || spec.n_cameras < 1 || spec.image_size < 16 ||
      spec.focal <= 0.0 || spec.camera_distance <= 2.0 * spec.head_radius)
    throw Error(ErrorKind::Validation, origin + ": implausible synthetic-scene geometry");
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  return parse_synth_spec(read_text_file(path), path.string());
}

TriangleMesh make_icosphere(double radius, int subdiv) {
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, p, 0}, {1, p, 0},   {-1, -p, 0}, {1, -p, 0},
                             {0, -1, p}, {0, 1, p},   {0, -1, -p}, {0, 1, -p},
                             {p, 0, -1}, {p, 0, 1},   {-p, 0, -1}, {-p, 0, 1}};
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
      {3, 8, 9},  {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (Vec3& v : verts) v.normalize();

  for (int s = 0; s < subdiv; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const int idx = static_cast<int>(verts.size());
      verts.push_back((verts[a] + verts[b]).normalized());
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TriangleMesh mesh;
  mesh.vertices.reserve(verts.size());
  for (const Vec3& v : verts) mesh.vertices.push_back(radius * v);
  mesh.faces = std::move(faces);
  return mesh;
}

Rgb synth_strand_color(const SynthSpec& spec, int strand_index, double polar_angle) {
  if (spec.color_mode == "uniform") return {0.45f, 0.30f, 0.20f};
  if (spec.color_mode == "two_tone") {
    const double mid = 0.5 * (deg2rad(spec.cap_angle_deg) + deg2rad(spec.phi_end_deg));
    return polar_angle < mid ? Rgb{0.75f, 0.55f, 0.30f} : Rgb{0.25f, 0.18f, 0.10f};
  }
  const double t = 0.3 + 0.5 * std::fmod(strand_index * kGolden, 1.0);
  return {static_cast<float>(t), static_cast<float>(0.8 * t), static_cast<float>(0.6 * t)};
}

namespace {

// One meridian strand: polar sweep at fixed azimuth on a slowly rising shell.
Strand meridian_strand(const SynthSpec& spec, double scale, double phi0, double psi,
                       double phi_end, double wave_amp, double wave_freq, double wave_phase,
                       const Vec3* exact_root) {
  const double r = spec.head_radius;
  const double dphi = kStrandSpacing / r;
  Strand s;
  const double span = std::max(phi_end - phi0, dphi);
  for (double phi = phi0;; phi += dphi) {
    if (phi > phi_end + 1e-12) break;
    const double rise = spec.shell_rise * (phi - phi0) / span;
    const double wave = wave_amp * std::sin(wave_freq * phi + wave_phase + psi);
    const double rho = scale * (r + kRootStandoff + rise + wave);
    s.vertices.push_back(rho * Vec3(std::sin(phi) * std::sin(psi), std::cos(phi),
                                    std::sin(phi) * std::cos(psi)));
  }
  if (exact_root && !s.vertices.empty())
    s.vertices.front() = *exact_root * ((r + kRootStandoff) / exact_root->norm());
  if (s.vertices.size() >= 2) s.recompute_tangents();
  return s;
}

struct RenderLayers {
  MaskRaster mask;
  FloatRaster prob;
  LabelRaster labels;
  FloatRaster depth;
  ColorRaster color;

  explicit RenderLayers(int size)
      : mask(size, size, 0),
        prob(size, size, 0.0f),
        labels(size, size, 0),
        depth(size, size, 0.0f),
        color(size, size, Rgb{0.0f, 0.0f, 0.0f}) {}
};

void render_head(const TriangleMesh& head, const Camera& cam, RenderLayers& out) {
  const int w = out.mask.width(), h = out.mask.height();
  const Rgb skin{0.8f, 0.65f, 0.55f};
  std::vector<Vec2> px(head.vertices.size());
  std::vector<double> pz(head.vertices.size());
  std::vector<char> ok(head.vertices.size());
  for (size_t i = 0; i < head.vertices.size(); ++i) {
    double depth = 0.0;
    const auto p = cam.project(head.vertices[i], &depth);
    ok[i] = p.has_value();
    if (p) {
      px[i] = *p;
      pz[i] = depth;
    }
  }
  for (const auto& f : head.faces) {
    if (!ok[f[0]] || !ok[f[1]] || !ok[f[2]]) continue;
    const Vec2 a = px[f[0]], b = px[f[1]], c = px[f[2]];
    const double area = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (std::abs(area) < 1e-12) continue;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}))));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}))));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}))));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const Vec2 p(x, y);
        const double l0 = ((b.x() - p.x()) * (c.y() - p.y()) - (b.y() - p.y()) * (c.x() - p.x())) / area;
        const double l1 = ((c.x() - p.x()) * (a.y() - p.y()) - (c.y() - p.y()) * (a.x() - p.x())) / area;
        const double l2 = 1.0 - l0 - l1;
        if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;
        const double inv_z = l0 / pz[f[0]] + l1 / pz[f[1]] + l2 / pz[f[2]];
        if (inv_z <= 0.0) continue;
        const double z = 1.0 / inv_z;
        float& zb = out.depth.at(x, y);
        if (zb != 0.0f && z >= zb) continue;
        zb = static_cast<float>(z);
        out.mask.at(x, y) = 255;
        out.color.at(x, y) = skin;
      }
  }
}

void stamp_strands(const SynthSpec& spec, const StrandSet& strands, const Camera& cam,
                   RenderLayers& out) {
  const int w = out.mask.width(), h = out.mask.height();
  for (size_t si = 0; si < strands.strands.size(); ++si) {
    const Strand& s = strands.strands[si];
    std::vector<std::optional<Vec2>> px(s.vertices.size());
    std::vector<double> pz(s.vertices.size(), 0.0);
    for (size_t i = 0; i < s.vertices.size(); ++i) {
      double d = 0.0;
      px[i] = cam.project(s.vertices[i], &d);
      pz[i] = d;
    }
    for (size_t i = 0; i + 1 < s.vertices.size(); ++i) {
      if (!px[i] || !px[i + 1]) continue;
      const Vec2 q0 = *px[i], q1 = *px[i + 1];
      const Vec2 d2 = q1 - q0;
      double ang = std::atan2(d2.y(), d2.x());
      if (ang < 0.0) ang += 2.0 * kPi;
      const uint8_t label =
          static_cast<uint8_t>(1 + std::min(3, static_cast<int>(ang / (kPi / 2.0))));
      const int steps = std::max(1, static_cast<int>(std::ceil(d2.norm() / 0.5)));
      for (int t = 0; t <= steps; ++t) {
        const double f = static_cast<double>(t) / steps;
        const Vec2 q = q0 + f * d2;
        const double z = 1.0 / ((1.0 - f) / pz[i] + f / pz[i + 1]);
        const Vec3 p3 = (1.0 - f) * s.vertices[i] + f * s.vertices[i + 1];
        const double polar = std::acos(std::clamp(p3.y() / p3.norm(), -1.0, 1.0));
        const Rgb col = synth_strand_color(spec, static_cast<int>(si), polar);
        const int bx0 = std::max(0, static_cast<int>(std::floor(q.x() - kStampRadiusPx)));
        const int bx1 = std::min(w - 1, static_cast<int>(std::ceil(q.x() + kStampRadiusPx)));
        const int by0 = std::max(0, static_cast<int>(std::floor(q.y() - kStampRadiusPx)));
        const int by1 = std::min(h - 1, static_cast<int>(std::ceil(q.y() + kStampRadiusPx)));
        for (int y = by0; y <= by1; ++y)
          for (int x = bx0; x <= bx1; ++x) {
            const double dx = x - q.x(), dy = y - q.y();
            if (dx * dx + dy * dy > kStampRadiusPx * kStampRadiusPx) continue;
            float& zb = out.depth.at(x, y);
            if (zb != 0.0f && z > zb + kDepthBias) continue;
            zb = static_cast<float>(z);
            out.mask.at(x, y) = 255;
            out.prob.at(x, y) = 1.0f;
            out.labels.at(x, y) = label;
            out.color.at(x, y) = col;
          }
      }
    }
  }
}

Camera ring_camera(const SynthSpec& spec, double azimuth) {
  Camera cam;
  cam.fx = cam.fy = spec.focal;
  cam.cx = cam.cy = (spec.image_size - 1) / 2.0;
  const double sa = std::sin(azimuth), ca = std::cos(azimuth);
  cam.R.row(0) = Vec3(ca, 0.0, -sa).transpose();
  cam.R.row(1) = Vec3(0.0, -1.0, 0.0).transpose();
  cam.R.row(2) = Vec3(-sa, 0.0, -ca).transpose();
  cam.t = Vec3(0.0, 0.0, spec.camera_distance);
  return cam;
}

std::vector<double> ring_azimuths(const SynthSpec& spec) {
  std::vector<double> az(spec.n_cameras);
  const double span = deg2rad(spec.camera_span_deg);
  for (int k = 0; k < spec.n_cameras; ++k) {
    if (std::abs(spec.camera_span_deg - 360.0) < 1e-9)
      az[k] = -kPi + 2.0 * kPi * k / spec.n_cameras;
    else if (spec.n_cameras == 1)
      az[k] = 0.0;
    else
      az[k] = -span / 2.0 + span * k / (spec.n_cameras - 1);
  }
  return az;
}

}  // namespace

StrandSet synth_style_strands(const SynthSpec& spec, int style_index) {
  double scale = 1.0, wave_amp = 0.0008, wave_freq = 3.0, wave_phase = 0.0;
  double phi_end = deg2rad(spec.phi_end_deg);
  if (style_index > 0) {
    const int k = style_index;
    scale = 1.0 + 0.015 * (k + 1) * (k % 2 == 1 ? -1.0 : 1.0);
    // Every non-reference style is wavier than style_00: deformation removes
    // scale differences, so the wave floor is what keeps style_00 the
    // unambiguous best match for a smooth query.
    wave_amp = 0.0012 + 0.0006 * (k % 4);
    wave_freq = 2.0 + (k % 3);
    wave_phase = 0.7 * k;
    phi_end -= deg2rad(3.0 * (k % 7));
  }
  const double cap = deg2rad(spec.cap_angle_deg);
  StrandSet set;
  set.source_tag = "style";
  // Styles are dense regardless of the scene's ground-truth strand count: the
  // voxelized shell must close between neighboring strands.
  const int n = std::max(spec.n_strands, 300);
  for (int i = 0; i < n; ++i) {
    const double c = 1.0 - (1.0 - std::cos(cap)) * (i + 0.5) / n;
    const double phi0 = std::acos(std::clamp(c, -1.0, 1.0));
    const double psi = 2.0 * kPi * std::fmod(i * kGolden, 1.0);
    Strand s = meridian_strand(spec, scale, phi0, psi, phi_end, wave_amp, wave_freq,
                               wave_phase, nullptr);
    if (s.vertices.size() >= 2) set.strands.push_back(std::move(s));
  }
  return set;
}

void generate_synthetic_database(const SynthSpec& spec, const std::filesystem::path& db_dir,
                                 int n_styles) {
  std::filesystem::create_directories(db_dir);
  for (int k = 0; k < n_styles; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "style_%02d", k);
    save_strands(db_dir / (std::string(name) + ".hstr"), synth_style_strands(spec, k));
  }
}

StrandSet generate_synthetic_scene(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  TriangleMesh head = make_icosphere(spec.head_radius, spec.head_subdiv);

  // Scalp roots: golden-spiral directions over the cap, snapped to distinct
  // mesh vertices so regrowth starts exactly where ground truth does.
  const double cap = deg2rad(spec.cap_angle_deg);
  const KdTree3 vert_tree(head.vertices);
  std::vector<uint8_t> root_flag(head.vertices.size(), 0);
  std::vector<int> roots;
  for (int i = 0; i < spec.n_strands; ++i) {
    const double c = 1.0 - (1.0 - std::cos(cap)) * (i + 0.5) / spec.n_strands;
    const double phi = std::acos(std::clamp(c, -1.0, 1.0));
    const double psi = 2.0 * kPi * std::fmod(i * kGolden, 1.0);
    const Vec3 dir(std::sin(phi) * std::sin(psi), std::cos(phi), std::sin(phi) * std::cos(psi));
    const int v =
        vert_tree.nearest(spec.head_radius * dir, [&](int idx) { return !root_flag[idx]; });
    if (v < 0) break;
    root_flag[v] = 1;
    roots.push_back(v);
  }
  head.vertex_flags["scalp_root"] = root_flag;

  StrandSet gt;
  gt.source_tag = "ground_truth";
  const double phi_end = deg2rad(spec.phi_end_deg);
  for (const int v : roots) {
    const Vec3& p = head.vertices[v];
    const double phi0 = std::acos(std::clamp(p.y() / p.norm(), -1.0, 1.0));
    const double psi = std::atan2(p.x(), p.z());
    Strand s = meridian_strand(spec, 1.0, phi0, psi, phi_end, 0.0, 1.0, 0.0, &p);
    if (s.vertices.size() < 2) continue;
    s.colors.resize(s.vertices.size());
    for (size_t j = 0; j < s.vertices.size(); ++j) {
      const double polar =
          std::acos(std::clamp(s.vertices[j].y() / s.vertices[j].norm(), -1.0, 1.0));
      const Rgb col =
          synth_strand_color(spec, static_cast<int>(gt.strands.size()), polar);
      s.colors[j] = Vec3(col.r, col.g, col.b);
    }
    gt.strands.push_back(std::move(s));
  }

  Scene scene;
  scene.head = head;
  const std::vector<double> azimuths = ring_azimuths(spec);
  for (int k = 0; k < spec.n_cameras; ++k) {
    CameraFrame frame;
    frame.frame_id = k;
    frame.camera = ring_camera(spec, azimuths[k]);
    frame.azimuth = camera_azimuth(frame.camera);
    RenderLayers layers(spec.image_size);
    render_head(head, frame.camera, layers);
    stamp_strands(spec, gt, frame.camera, layers);
    frame.mask = std::move(layers.mask);
    frame.hair_prob = std::move(layers.prob);
    frame.dir_labels = std::move(layers.labels);
    frame.depth = std::move(layers.depth);
    frame.color = std::move(layers.color);
    scene.frames.push_back(std::move(frame));
  }

  save_scene(out_dir, scene);
  save_strands(out_dir / "gt_strands.hstr", gt);
  if (spec.db_styles > 0) generate_synthetic_database(spec, out_dir / "db", spec.db_styles);
  return gt;
}

}  // namespace hairrec
