#include "doctest.h"

#include "hairrec/io.hpp"
#include "hairrec/scene.hpp"
#include "hairrec/synth.hpp"
#include "test_util.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace hairrec;
namespace fs = std::filesystem;

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.head_subdiv = 2;
  spec.n_strands = 20;
  spec.n_cameras = 3;
  spec.camera_span_deg = 120.0;
  spec.image_size = 64;
  spec.focal = 100.0;
  return spec;
}

std::vector<std::string> scene_files(const Scene& scene) {
  std::vector<std::string> names{"cameras.txt", "head.obj"};
  for (const auto& f : scene.frames) {
    const std::string id = std::to_string(f.frame_id);
    names.push_back("mask_" + id + ".pgm");
    names.push_back("hair_prob_" + id + ".pgm");
    names.push_back("dir_labels_" + id + ".pgm");
    names.push_back("depth_" + id + ".dpt");
    if (f.color) names.push_back("color_" + id + ".ppm");
  }
  return names;
}

}  // namespace

TEST_CASE("config text applies keys and skips comments") {
  SceneConfig cfg;
  apply_config_text(cfg,
                    "# tuning\n"
                    "\n"
                    "hull_resolution = 64\n"
                    "  merge_distance=0.01  \n"
                    "scene_dir = /tmp/somewhere\n",
                    "inline");
  CHECK(cfg.hull_resolution == 64);
  CHECK(cfg.merge_distance == doctest::Approx(0.01));
  CHECK(cfg.scene_dir == fs::path("/tmp/somewhere"));
  // untouched keys keep their defaults
  CHECK(cfg.retrieve_k == 20);
  CHECK(cfg.head_width == doctest::Approx(0.2));
}

TEST_CASE("config errors name the origin and line") {
  SceneConfig cfg;
  CHECK_THROWS_WITH_AS(apply_config_text(cfg, "hull_resolution = 64\nfrob = 3\n", "myconf"),
                       doctest::Contains("unknown key 'frob'"), Error);
  CHECK_THROWS_WITH_AS(apply_config_text(cfg, "hull_resolution = 64\nfrob = 3\n", "myconf"),
                       doctest::Contains("myconf line 2"), Error);
  CHECK_THROWS_WITH_AS(apply_config_text(cfg, "merge_distance = fast\n", "c"),
                       doctest::Contains("bad numeric value"), Error);
  CHECK_THROWS_WITH_AS(apply_config_text(cfg, "merge_distance 0.01\n", "c"),
                       doctest::Contains("expected 'key = value'"), Error);
}

TEST_CASE("load_config reads a file and rejects a missing one") {
  const fs::path dir = testutil::fresh_dir("scene_config");
  {
    std::ofstream out(dir / "run.cfg");
    out << "field_w2 = 0.25\nout_dir = results\n";
  }
  const SceneConfig cfg = load_config(dir / "run.cfg");
  CHECK(cfg.field_w2 == doctest::Approx(0.25));
  CHECK(cfg.out_dir == fs::path("results"));

  try {
    load_config(dir / "absent.cfg");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("generated scene loads, validates, and reloads byte-identically") {
  const fs::path dir = testutil::fresh_dir("scene_roundtrip");
  generate_synthetic_scene(small_spec(), dir);

  SceneConfig cfg;
  const Scene scene = load_scene(dir, cfg);
  REQUIRE(scene.frames.size() == 3);
  CHECK(std::is_sorted(scene.frames.begin(), scene.frames.end(),
                       [](const CameraFrame& a, const CameraFrame& b) {
                         return a.frame_id < b.frame_id;
                       }));
  CHECK(scene.head.has_flag("scalp_root"));
  // generator output is already normalized, so ingest applies no transform
  CHECK(scene.ingest_scale == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& f : scene.frames)
    CHECK(std::abs(wrap_angle(f.azimuth - camera_azimuth(f.camera))) < 1e-12);

  const fs::path dir2 = testutil::fresh_dir("scene_roundtrip_out");
  save_scene(dir2, scene);
  for (const auto& name : scene_files(scene)) {
    CAPTURE(name);
    CHECK(testutil::bytes_equal(dir / name, dir2 / name));
  }
}

TEST_CASE("frames are ordered by id even when cameras.txt is shuffled") {
  const fs::path dir = testutil::fresh_dir("scene_shuffle");
  generate_synthetic_scene(small_spec(), dir);

  std::vector<std::string> lines;
  {
    std::ifstream in(dir / "cameras.txt");
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) lines.push_back(line);
  }
  REQUIRE(lines.size() == 3);
  std::rotate(lines.begin(), lines.begin() + 1, lines.end());
  {
    std::ofstream out(dir / "cameras.txt");
    for (const auto& l : lines) out << l << "\n";
  }

  SceneConfig cfg;
  const Scene scene = load_scene(dir, cfg);
  REQUIRE(scene.frames.size() == 3);
  for (size_t i = 1; i < scene.frames.size(); ++i)
    CHECK(scene.frames[i - 1].frame_id < scene.frames[i].frame_id);
}

TEST_CASE("missing inputs are reported with their path") {
  const fs::path dir = testutil::fresh_dir("scene_missing");
  generate_synthetic_scene(small_spec(), dir);
  SceneConfig cfg;

  fs::remove(dir / "depth_1.dpt");
  try {
    load_scene(dir, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Ingest);
    CHECK(std::string(e.what()).find("missing input file") != std::string::npos);
    CHECK(std::string(e.what()).find("depth_1.dpt") != std::string::npos);
  }

  const fs::path empty = testutil::fresh_dir("scene_empty");
  CHECK_THROWS_WITH_AS(load_scene(empty, cfg), doctest::Contains("cameras.txt"), Error);
}

TEST_CASE("mismatched raster resolutions are rejected per frame") {
  const fs::path dir = testutil::fresh_dir("scene_mismatch");
  generate_synthetic_scene(small_spec(), dir);
  save_pgm(dir / "hair_prob_0.pgm", Raster<uint8_t>(8, 8));

  SceneConfig cfg;
  CHECK_THROWS_WITH_AS(load_scene(dir, cfg), doctest::Contains("frame 0"), Error);
  CHECK_THROWS_WITH_AS(load_scene(dir, cfg), doctest::Contains("hair_prob"), Error);
}

TEST_CASE("a head without scalp roots is rejected") {
  const fs::path dir = testutil::fresh_dir("scene_noroots");
  generate_synthetic_scene(small_spec(), dir);

  TriangleMesh head = load_obj(dir / "head.obj");
  head.vertex_flags.clear();
  save_obj(dir / "head.obj", head);

  SceneConfig cfg;
  try {
    load_scene(dir, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Ingest);
    CHECK(std::string(e.what()).find("scalp_root") != std::string::npos);
  }
}

TEST_CASE("an off-origin, off-scale head is normalized at ingest") {
  const fs::path dir = testutil::fresh_dir("scene_norm");
  generate_synthetic_scene(small_spec(), dir);

  SceneConfig cfg;
  const Scene before = load_scene(dir, cfg);

  // Scale the head up 2x and shift it; cameras and depth stay as captured.
  TriangleMesh head = load_obj(dir / "head.obj");
  const Vec3 offset(0.05, 0.02, -0.01);
  for (auto& v : head.vertices) v = 2.0 * v + offset;
  save_obj(dir / "head.obj", head);

  const Scene after = load_scene(dir, cfg);
  CHECK(after.ingest_scale == doctest::Approx(0.5).epsilon(1e-9));

  const Aabb box = after.head.bounds();
  CHECK(box.extent().x() == doctest::Approx(cfg.head_width).epsilon(1e-9));
  CHECK(box.center().norm() < 1e-9);

  // Camera centers follow the same similarity: c' = s * (c - shift_center).
  for (size_t i = 0; i < after.frames.size(); ++i) {
    const Vec3 expect = 0.5 * (before.frames[i].camera.center() - offset);
    CHECK((after.frames[i].camera.center() - expect).norm() < 1e-9);
  }

  // Depth maps are scaled by the same factor.
  const auto& d0 = before.frames[0].depth;
  const auto& d1 = after.frames[0].depth;
  REQUIRE(d0.width() == d1.width());
  for (int i = 0; i < d0.width() * d0.height(); ++i)
    CHECK(std::abs(d1.data()[i] - 0.5f * d0.data()[i]) < 1e-5f);
}
