#pragma once

#include "hairrec/camera.hpp"
#include "hairrec/core.hpp"
#include "hairrec/orientation2d.hpp"
#include "hairrec/scene.hpp"
#include "hairrec/strand.hpp"

#include <vector>

namespace hairrec {

struct QueryStrands {
  StrandSet set;
  std::vector<int> source_frame;  // per strand; merged strands keep the base's id
};

struct LiftResult {
  std::vector<Strand> strands;
  int dropped = 0;  // 2D strands with no liftable segment
};

// Unprojects each 2D point through the frame's depth map (nearest pixel).
// Sentinel depths split a strand into segments; segments under 2 points drop.
LiftResult lift_strands(const std::vector<Strand2D>& strands2d, const CameraFrame& frame);

// Greedy outlier filter: a vertex farther than `threshold` from the last kept
// vertex is a spike (removed) when the following vertex is back within range,
// and a genuine gap (strand split) otherwise. Segments under 2 vertices drop.
std::vector<Strand> remove_peaks(const Strand& strand, double threshold);

// Repeatedly merges the same-direction pair with the longest overlap run
// (vertices whose nearest neighbor on the other strand is closer than
// cfg.merge_distance) until the count reaches 1.5 x target or no pair
// qualifies; above that, the `target` longest strands are kept.
QueryStrands merge_strands(std::vector<Strand> all, std::vector<int> source_frame,
                           int target, const SceneConfig& cfg);

}  // namespace hairrec
