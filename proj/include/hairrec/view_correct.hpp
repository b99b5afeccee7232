#pragma once

#include "hairrec/core.hpp"
#include "hairrec/hair_db.hpp"
#include "hairrec/kdtree.hpp"
#include "hairrec/mesh.hpp"
#include "hairrec/strands3d.hpp"
#include "hairrec/visual_hull.hpp"

#include <string>
#include <utility>
#include <vector>

namespace hairrec {

// Per rough-mesh-vertex anchor data produced by view correction.
struct AnchorTransforms {
  std::vector<Vec3> v;        // original positions
  std::vector<Vec3> v_prime;  // corrected positions
  std::vector<Mat34> T;       // affine transform per vertex
  std::vector<double> c;      // confidence in [0,1]
  KdTree3 tree;               // over v; rebuild after editing positions

  size_t size() const { return v.size(); }
  void build_tree() { tree = KdTree3(v); }
};

// Correct registered targets in the low-confidence azimuth range: keeps the
// original surface Laplacians where the view never saw the hair while pinning
// confident vertices to their registered positions. Partially confident
// vertices are pinned with weight lambda * c_i. Throws when a connected
// component has no full-confidence vertex (singular system) or the solve
// misses the 1e-10 relative-residual contract.
AnchorTransforms view_correct(const RoughMesh& rough, const std::vector<Vec3>& targets,
                              const ConfidenceRegion& region, double lambda, double sigma);

// Shares of the blended transform: alpha_coef + sum of anchor coefs == 1.
struct BlendCoefficients {
  double alpha_coef = 1.0;
  std::vector<std::pair<int, double>> anchors;  // (anchor index, coefficient)
};

// Matrix-weighted average of the n nearest anchor transforms and the
// identity, weights w_i = exp(-|p - v_i|^2 / (2 sigma_w^2)).
Mat34 blend_transform(const Vec3& p, const AnchorTransforms& anchors, double alpha,
                      double sigma_w, int n_neighbors = 10,
                      BlendCoefficients* coefs = nullptr);

// Applies the blended transform to every strand vertex; tangents recomputed.
StrandSet deform_hairstyle(const Hairstyle& style, const AnchorTransforms& anchors,
                           double alpha = 0.01, double sigma_w = 0.015, int n_neighbors = 10);

struct DeformedCandidate {
  std::string id;
  StrandSet strands;
};

// Argmin of strand_set_distance(query, candidate index) over the deformed
// candidates; ties resolved by id.
std::string final_select(const std::vector<DeformedCandidate>& candidates,
                         const QueryStrands& query, double sample_spacing);

}  // namespace hairrec
