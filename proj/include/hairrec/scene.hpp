#pragma once

#include "hairrec/camera.hpp"
#include "hairrec/core.hpp"
#include "hairrec/mesh.hpp"

#include <filesystem>
#include <vector>

namespace hairrec {

// Every tunable constant in one place; all are overridable through a
// `key = value` config file (see load_config).
struct SceneConfig {
  // paths
  std::filesystem::path scene_dir;
  std::filesystem::path db_dir;
  std::filesystem::path out_dir;

  // ingest normalization
  double head_width = 0.2;  // head bbox x-extent after ingest

  // visual hull
  int hull_resolution = 128;
  double hull_bounds_scale = 1.5;    // grid bounds = this x head extent
  double blur_area_factor = 0.33;    // keep frames with area >= factor * mean
  double hair_prob_threshold = 0.5;  // strict > for hair decisions

  // per-frame 2D strands
  double frame_bin_width = kPi / 8.0;  // frame selection bin, radians
  int n_filters = 32;
  int filter_ksize = 17;
  double filter_wavelength = 4.0;  // px
  double trace_step_px = 1.0;
  double trace_response_frac = 0.1;   // rho_min = frac * frame max response
  double trace_max_turn_deg = 15.0;   // per step
  double trace_min_length_px = 20.0;

  // 3D strands
  double peak_distance = 0.002;   // scene units, at head width 0.2
  double merge_distance = 0.004;
  int target_strands = 100;

  // database
  double db_voxel_size = 0.005;
  int db_smooth_iters = 10;
  double db_smooth_step = 0.5;
  double db_sample_spacing = 0.004;  // index decimation
  int retrieve_k = 20;

  // deformation
  double correct_lambda = 1e-5;
  double correct_sigma = kPi / 18.0;
  double blend_alpha = 0.01;
  double blend_sigma = 0.015;
  int blend_anchors = 10;
  int field_resolution = 80;
  double field_w1 = 1.0;
  double field_w2 = 0.1;
  int field_influence_radius = 2;  // voxels
  int regrow_max_steps = 300;
  double regrow_min_magnitude = 1e-3;
  int resample_count = 50;

  // evaluation / texture
  double iou_line_width_px = 2.0;
  double color_depth_tolerance = 0.005;  // visibility slack, scene units
};

// Applies `key = value` lines (UTF-8, '#' comments) onto cfg. Unknown keys and
// malformed values raise Validation errors naming the line.
void apply_config_text(SceneConfig& cfg, const std::string& text, const std::string& origin);
SceneConfig load_config(const std::filesystem::path& path);

struct Scene {
  std::vector<CameraFrame> frames;  // sorted by frame_id
  TriangleMesh head;                // carries a "scalp_root" flag channel
  double ingest_scale = 1.0;        // similarity scale applied at ingest
};

// Loads cameras.txt, per-frame rasters (mask_<id>.pgm, hair_prob_<id>.pgm,
// dir_labels_<id>.pgm, depth_<id>.dpt, optional color_<id>.ppm) and head.obj,
// then normalizes the scene so the head bbox is centered at the origin with
// x-extent cfg.head_width. Near-identity normalization is skipped so generator
// output reloads bit-exactly.
Scene load_scene(const std::filesystem::path& root, const SceneConfig& cfg);

// Writes a scene back in the exact ingest formats.
void save_scene(const std::filesystem::path& root, const Scene& scene);

}  // namespace hairrec
