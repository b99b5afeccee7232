#include "hairrec/eval.hpp"
#include "hairrec/io.hpp"
#include "hairrec/pipeline.hpp"
#include "hairrec/scene.hpp"
#include "hairrec/synth.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace hairrec;

namespace {

int cmd_run(const std::string& scene_dir, const std::string& db_dir,
            const std::string& config_path, const std::string& out_dir) {
  SceneConfig cfg;
  if (!config_path.empty()) cfg = load_config(config_path);
  cfg.scene_dir = scene_dir;
  cfg.db_dir = db_dir;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const PipelineReport report = run_pipeline(cfg);
  std::cout << report.to_text();
  return 0;
}

int cmd_synth(const std::string& spec_path, const std::string& out_dir) {
  const SynthSpec spec = load_synth_spec(spec_path);
  const StrandSet gt = generate_synthetic_scene(spec, out_dir);
  std::cout << "scene written to " << out_dir << ": " << spec.n_cameras << " frames, "
            << gt.strands.size() << " ground-truth strands\n";
  return 0;
}

int cmd_eval(const std::string& strands_path, const std::string& scene_dir,
             const std::string& gt_dir, double width_px) {
  SceneConfig cfg;
  cfg.scene_dir = scene_dir;
  const Scene scene = load_scene(scene_dir, cfg);
  const StrandSet strands = load_strands(strands_path);
  double total = 0.0;
  int n = 0;
  for (const CameraFrame& f : scene.frames) {
    const fs::path mask_path = fs::path(gt_dir) / ("mask_" + std::to_string(f.frame_id) + ".pgm");
    if (!fs::exists(mask_path)) continue;
    const MaskRaster gt = load_pgm(mask_path);
    const double iou = evaluate_iou(strands, f, gt, width_px);
    std::cout << "frame " << f.frame_id << " iou " << format_double(iou) << "\n";
    total += iou;
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::Argument, "no mask_<frame_id>.pgm found in " + gt_dir);
  std::cout << "mean iou " << format_double(total / n) << "\n";
  return 0;
}

int cmd_morph(const std::string& a_path, const std::string& b_path, double t,
              const std::string& head_path, const std::string& out_path) {
  const StrandSet a = load_strands(a_path);
  const StrandSet b = load_strands(b_path);
  const TriangleMesh head = load_obj(head_path);
  const StrandSet result = morph(a, b, t, head);
  save_strands(out_path, result);
  std::cout << "morph written to " << out_path << ": " << result.strands.size() << " strands\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hairpipe: video-to-hair reconstruction pipeline"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "reconstruct strands from a scene directory");
  std::string run_scene, run_db, run_config, run_out;
  run->add_option("scene_dir", run_scene, "scene directory")->required();
  run->add_option("--db", run_db, "hairstyle database directory")->required();
  run->add_option("--config", run_config, "key = value config file");
  run->add_option("--out", run_out, "output directory (default <scene_dir>/out)");

  auto* synth = app.add_subcommand("synth", "generate a synthetic scene");
  std::string synth_spec, synth_out;
  synth->add_option("spec", synth_spec, "synthesis spec file")->required();
  synth->add_option("out_dir", synth_out, "output scene directory")->required();

  auto* eval = app.add_subcommand("eval", "projection IOU of strands against masks");
  std::string eval_strands, eval_scene, eval_gt;
  double eval_width = 2.0;
  eval->add_option("strands", eval_strands, "strand .hstr file")->required();
  eval->add_option("scene_dir", eval_scene, "scene directory (cameras)")->required();
  eval->add_option("--gt", eval_gt, "directory of mask_<frame_id>.pgm ground truth")->required();
  eval->add_option("--width", eval_width, "line width in pixels (default 2)");

  auto* morph_cmd = app.add_subcommand("morph", "interpolate two corresponded strand sets");
  std::string morph_a, morph_b, morph_head, morph_out = "morph.hstr";
  double morph_t = 0.5;
  morph_cmd->add_option("a", morph_a, "first .hstr")->required();
  morph_cmd->add_option("b", morph_b, "second .hstr")->required();
  morph_cmd->add_option("--t", morph_t, "interpolation parameter in [0,1]")->required();
  morph_cmd->add_option("--head", morph_head, "head OBJ (face flags trim strands)")->required();
  morph_cmd->add_option("--out", morph_out, "output .hstr (default morph.hstr)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) return cmd_run(run_scene, run_db, run_config, run_out);
    if (app.got_subcommand(synth)) return cmd_synth(synth_spec, synth_out);
    if (app.got_subcommand(eval)) return cmd_eval(eval_strands, eval_scene, eval_gt, eval_width);
    if (app.got_subcommand(morph_cmd))
      return cmd_morph(morph_a, morph_b, morph_t, morph_head, morph_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", error_kind_name(e.kind()), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
