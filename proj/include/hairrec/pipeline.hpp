#pragma once

#include "hairrec/core.hpp"
#include "hairrec/hair_db.hpp"
#include "hairrec/scene.hpp"
#include "hairrec/strand.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hairrec {

struct PipelineReport {
  std::vector<std::pair<std::string, double>> stages;  // name, milliseconds
  int frames_total = 0;
  int frames_rejected = 0;
  std::vector<int> selected_frames;
  std::vector<RankedStyle> ranking;
  std::string selected_style;
  int final_strand_count = 0;
  std::vector<std::pair<int, double>> iou;  // frame id, IOU
  double mean_iou = 0.0;
  std::vector<std::string> outputs;

  std::string to_text() const;
};

// Runs the full reconstruction out of cfg.scene_dir / cfg.db_dir into
// cfg.out_dir. Stage failures rethrow the original error prefixed with the
// stage name; artifacts produced before the failure stay on disk.
PipelineReport run_pipeline(const SceneConfig& cfg);

}  // namespace hairrec
