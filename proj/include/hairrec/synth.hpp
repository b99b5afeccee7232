#pragma once

#include "hairrec/camera.hpp"
#include "hairrec/core.hpp"
#include "hairrec/mesh.hpp"
#include "hairrec/strand.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace hairrec {

// Parameters of the synthetic sphere-head scene. Parsed from `key = value`
// text; unknown keys are rejected.
struct SynthSpec {
  double head_radius = 0.1;
  int head_subdiv = 4;
  int n_strands = 200;
  int n_cameras = 24;
  double camera_span_deg = 180.0;
  double camera_distance = 0.5;
  int image_size = 256;
  double focal = 400.0;
  std::string color_mode = "fibers";  // fibers | two_tone | uniform
  double cap_angle_deg = 75.0;        // scalp cap half-angle from +y
  double phi_end_deg = 175.0;         // polar angle where strands end
  double shell_rise = 0.004;          // radial lift accumulated root -> tip
  int db_styles = 0;                  // > 0: also emit <out>/db
  std::uint64_t seed = 1;
};

SynthSpec parse_synth_spec(const std::string& text, const std::string& origin);
SynthSpec load_synth_spec(const std::filesystem::path& path);

// Unit-ish sphere mesh: subdivided icosahedron projected to `radius`.
TriangleMesh make_icosphere(double radius, int subdiv);

// Analytic per-strand color used by both the renderer and the color oracle.
Rgb synth_strand_color(const SynthSpec& spec, int strand_index, double polar_angle);

// Writes head.obj (scalp_root flags), per-frame layers, cameras.txt, and
// gt_strands.hstr into out_dir; returns the ground-truth strands. When
// spec.db_styles > 0 a hairstyle database is generated under out_dir/db.
StrandSet generate_synthetic_scene(const SynthSpec& spec, const std::filesystem::path& out_dir);

// Standalone database generator: n_styles .hstr files, style_00 being a
// lightly perturbed copy of the scene's strand family, the rest scaled /
// shortened / wavy variants.
void generate_synthetic_database(const SynthSpec& spec, const std::filesystem::path& db_dir,
                                 int n_styles);

// The strand family of database style k (parametric roots, full-ring cap).
StrandSet synth_style_strands(const SynthSpec& spec, int style_index);

}  // namespace hairrec
