#include "hairrec/pipeline.hpp"

#include "hairrec/eval.hpp"
#include "hairrec/io.hpp"
#include "hairrec/orientation2d.hpp"
#include "hairrec/orientation_field.hpp"
#include "hairrec/registration.hpp"
#include "hairrec/strands3d.hpp"
#include "hairrec/view_correct.hpp"
#include "hairrec/visual_hull.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <type_traits>
#include <utility>

namespace hairrec {

namespace {

// Times a stage and tags any Error with the stage name so failures point at
// the pipeline step, not just the module.
class StageRunner {
 public:
  explicit StageRunner(PipelineReport& report) : report_(report) {}

  template <typename F>
  auto run(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<std::invoke_result_t<F&>>) {
        f();
        record(name, start);
      } else {
        auto result = f();
        record(name, start);
        return result;
      }
    } catch (const Error& e) {
      throw Error(e.kind(), "[stage " + name + "] " + e.what());
    }
  }

 private:
  void record(const std::string& name, std::chrono::steady_clock::time_point start) {
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    report_.stages.emplace_back(name, ms);
  }

  PipelineReport& report_;
};

FloatRaster luminance(const ColorRaster& color) {
  FloatRaster out(color.width(), color.height());
  for (int y = 0; y < color.height(); ++y)
    for (int x = 0; x < color.width(); ++x) {
      const Rgb& c = color.at(x, y);
      out.at(x, y) = 0.299f * c.r + 0.587f * c.g + 0.114f * c.b;
    }
  return out;
}

MaskRaster prob_mask(const FloatRaster& prob, double threshold) {
  MaskRaster out(prob.width(), prob.height());
  for (int y = 0; y < prob.height(); ++y)
    for (int x = 0; x < prob.width(); ++x)
      out.at(x, y) = prob.at(x, y) > threshold ? 255 : 0;
  return out;
}

const CameraFrame& frame_by_id(const std::vector<CameraFrame>& frames, int id) {
  for (const auto& f : frames)
    if (f.frame_id == id) return f;
  throw Error(ErrorKind::Argument, "pipeline: unknown frame id " + std::to_string(id));
}

}  // namespace

std::string PipelineReport::to_text() const {
  std::ostringstream os;
  os << "pipeline report\n";
  os << "frames total " << frames_total << "\n";
  os << "frames rejected " << frames_rejected << "\n";
  os << "frames selected";
  for (int id : selected_frames) os << " " << id;
  os << "\n";
  os << "ranking\n";
  for (const auto& r : ranking) os << "  " << r.id << " " << format_double(r.distance) << "\n";
  os << "selected style " << selected_style << "\n";
  os << "final strands " << final_strand_count << "\n";
  os << "iou\n";
  for (const auto& [id, value] : iou) os << "  frame " << id << " " << format_double(value) << "\n";
  os << "mean iou " << format_double(mean_iou) << "\n";
  // Timing lines carry a distinct prefix: they are the only part of the
  // report excluded from the bit-identical determinism guarantee.
  for (const auto& [name, ms] : stages) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", ms);
    os << "time " << name << " " << buf << "\n";
  }
  os << "outputs\n";
  for (const auto& p : outputs) os << "  " << p << "\n";
  return os.str();
}

PipelineReport run_pipeline(const SceneConfig& cfg) {
  namespace fs = std::filesystem;

  PipelineReport report;
  StageRunner stage(report);

  const fs::path out = cfg.out_dir.empty() ? cfg.scene_dir / "out" : cfg.out_dir;
  fs::create_directories(out);
  auto emit = [&](const fs::path& p) { report.outputs.push_back(p.string()); };

  Scene scene;
  HairDatabase db;
  stage.run("load", [&] {
    scene = load_scene(cfg.scene_dir, cfg);
    db = load_database(cfg.db_dir, cfg);
    if (db.entries.empty())
      throw Error(ErrorKind::EmptyResult, "database at " + cfg.db_dir.string() + " holds no styles");
  });
  report.frames_total = static_cast<int>(scene.frames.size());

  const std::vector<int> kept_ids =
      stage.run("blur", [&] { return reject_blurred_frames(scene.frames, cfg); });
  const std::set<int> kept_set(kept_ids.begin(), kept_ids.end());
  FrameRefs kept;
  for (const auto& f : scene.frames)
    if (kept_set.count(f.frame_id)) kept.push_back(&f);
  report.frames_rejected = report.frames_total - static_cast<int>(kept.size());

  VisualHull hull;
  stage.run("hull", [&] {
    VoxelGrid grid = hull_grid_for(scene.head, cfg);
    hull = carve(kept, std::move(grid));
  });

  TriangleMesh x_h;
  stage.run("label", [&] {
    label_hull_hair(hull, kept, cfg);
    x_h = hair_submesh(hull);
    if (x_h.vertices.empty())
      throw Error(ErrorKind::EmptyResult, "no hull vertex labeled as hair");
  });

  ConfidenceRegion region;
  stage.run("region", [&] {
    region = confidence_region(kept, &hull);
    save_obj(out / "hull.obj", hull.surface);
    emit(out / "hull.obj");
  });

  const std::vector<int> selected = stage.run("select", [&] {
    std::vector<CameraFrame> meta;
    meta.reserve(kept.size());
    for (const CameraFrame* f : kept) {
      CameraFrame m;
      m.frame_id = f->frame_id;
      m.azimuth = f->azimuth;
      meta.push_back(std::move(m));
    }
    return select_frames(meta, cfg);
  });
  report.selected_frames = selected;

  std::vector<std::vector<Strand2D>> traced(selected.size());
  stage.run("trace", [&] {
    const FilterBank bank(cfg.n_filters, cfg.filter_ksize, cfg.filter_wavelength);
    bool warned = false;
    for (size_t i = 0; i < selected.size(); ++i) {
      const CameraFrame& f = frame_by_id(scene.frames, selected[i]);
      FloatRaster image = f.color ? luminance(*f.color) : f.hair_prob;
      if (!f.color && !warned) {
        std::fprintf(stderr, "warning: no color layer; tracing on hair probability\n");
        warned = true;
      }
      const MaskRaster hair = prob_mask(f.hair_prob, cfg.hair_prob_threshold);
      const OrientationMap omap = orientation_map(image, hair, bank);
      traced[i] = orient_strands(trace_strands(omap, hair, TraceParams::from_config(cfg)),
                                 f.dir_labels);
    }
  });

  std::vector<Strand> all3d;
  std::vector<int> all_sources;
  stage.run("lift", [&] {
    for (size_t i = 0; i < selected.size(); ++i) {
      const CameraFrame& f = frame_by_id(scene.frames, selected[i]);
      const LiftResult lifted = lift_strands(traced[i], f);
      for (const Strand& s : lifted.strands)
        for (Strand& part : remove_peaks(s, cfg.peak_distance)) {
          all3d.push_back(std::move(part));
          all_sources.push_back(f.frame_id);
        }
    }
    if (all3d.empty())
      throw Error(ErrorKind::EmptyResult, "no 3D strand survived lifting");
  });

  QueryStrands query;
  stage.run("merge", [&] {
    query = merge_strands(std::move(all3d), std::move(all_sources), cfg.target_strands, cfg);
    save_strands(out / "query_strands.hstr", query.set);
    emit(out / "query_strands.hstr");
  });

  const std::vector<std::string> candidates = stage.run("prune", [&] { return prune(x_h, db); });

  report.ranking = stage.run("retrieve", [&] {
    const int k = std::min<int>(cfg.retrieve_k, static_cast<int>(candidates.size()));
    return retrieve(query.set, db, candidates, k);
  });

  std::vector<RegistrationResult> registered(report.ranking.size());
  stage.run("register", [&] {
    for (size_t i = 0; i < report.ranking.size(); ++i) {
      const DatabaseEntry* e = db.find(report.ranking[i].id);
      registered[i] = register_mesh(e->rough.mesh, x_h);
    }
  });

  std::vector<AnchorTransforms> anchors(report.ranking.size());
  stage.run("correct", [&] {
    for (size_t i = 0; i < report.ranking.size(); ++i) {
      const DatabaseEntry* e = db.find(report.ranking[i].id);
      anchors[i] = view_correct(e->rough, registered[i].targets, region, cfg.correct_lambda,
                                cfg.correct_sigma);
    }
  });

  std::vector<DeformedCandidate> deformed(report.ranking.size());
  stage.run("deform", [&] {
    for (size_t i = 0; i < report.ranking.size(); ++i) {
      const DatabaseEntry* e = db.find(report.ranking[i].id);
      deformed[i] = {e->style.id, deform_hairstyle(e->style, anchors[i], cfg.blend_alpha,
                                                   cfg.blend_sigma, cfg.blend_anchors)};
    }
  });

  size_t best = 0;
  stage.run("final_select", [&] {
    report.selected_style = final_select(deformed, query, cfg.db_sample_spacing);
    for (size_t i = 0; i < deformed.size(); ++i)
      if (deformed[i].id == report.selected_style) best = i;
    const DatabaseEntry* e = db.find(report.selected_style);
    TriangleMesh corrected = e->rough.mesh;
    corrected.vertices = anchors[best].v_prime;
    save_obj(out / "corrected_rough.obj", corrected);
    emit(out / "corrected_rough.obj");
    save_strands(out / "deformed_best.hstr", deformed[best].strands);
    emit(out / "deformed_best.hstr");
  });

  OrientationField field;
  stage.run("field", [&] {
    field = build_orientation_field(deformed[best].strands, query, scene.head, cfg);
    FieldDump dump;
    dump.nx = dump.ny = dump.nz = field.n;
    dump.values.resize(field.values.size() * 3);
    for (size_t v = 0; v < field.values.size(); ++v)
      for (int c = 0; c < 3; ++c)
        dump.values[3 * v + c] = static_cast<float>(field.values[v][c]);
    save_field(out / "field.ornt", dump);
    emit(out / "field.ornt");
  });

  StrandSet regrown;
  stage.run("regrow", [&] {
    regrown = regrow_strands(field, scene.head, cfg);
    if (regrown.strands.empty())
      throw Error(ErrorKind::EmptyResult, "no strand regrown from the scalp");
  });

  StrandSet final_set;
  stage.run("resample", [&] {
    final_set.source_tag = "final";
    final_set.strands.reserve(regrown.strands.size());
    for (const Strand& s : regrown.strands)
      final_set.strands.push_back(resample_strand(s, cfg.resample_count));
  });

  stage.run("colors", [&] {
    final_set = strand_colors(final_set, scene.frames, cfg.color_depth_tolerance);
    final_set.source_tag = "final";
    save_strands(out / "final_strands.hstr", final_set);
    emit(out / "final_strands.hstr");
    save_obj(out / "head.obj", scene.head);
    emit(out / "head.obj");
  });
  report.final_strand_count = static_cast<int>(final_set.strands.size());

  stage.run("iou", [&] {
    double total = 0.0;
    for (const CameraFrame* f : kept) {
      const MaskRaster gt = prob_mask(f->hair_prob, cfg.hair_prob_threshold);
      const double v = evaluate_iou(final_set, *f, gt, cfg.iou_line_width_px);
      report.iou.emplace_back(f->frame_id, v);
      total += v;
    }
    report.mean_iou = kept.empty() ? 0.0 : total / static_cast<double>(kept.size());
  });

  report.outputs.push_back((out / "report.txt").string());
  write_text_file(out / "report.txt", report.to_text());
  return report;
}

}  // namespace hairrec
