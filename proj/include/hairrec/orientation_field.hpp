#pragma once

#include "hairrec/core.hpp"
#include "hairrec/mesh.hpp"
#include "hairrec/scene.hpp"
#include "hairrec/strands3d.hpp"

#include <cstdint>
#include <vector>

namespace hairrec {

// Dense cubic lattice of 3-vectors covering the head and both strand sets.
// Values are stored per voxel center (x-fastest), unit length or zero.
struct OrientationField {
  Vec3 origin = Vec3::Zero();  // min corner of the grid box
  double voxel = 0.0;
  int n = 0;  // voxels per axis

  std::vector<Vec3> values;
  std::vector<int8_t> constraint;  // 0 free, 1 best-strand, 2 query, 3 both

  int index(int i, int j, int k) const { return (k * n + j) * n + i; }
  bool in_range(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < n && j < n && k < n;
  }
  Vec3 center(int i, int j, int k) const {
    return origin + voxel * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  bool contains(const Vec3& p) const;
  // Trilinear interpolation over voxel centers, clamped at the walls.
  Vec3 sample(const Vec3& p) const;
};

// Diffuses best-match strand directions (set C, rasterized along segments)
// and query directions (set Q, dilated to r_infl voxels) through the grid
// Laplacian: (L + w1 S_C + w2 S_Q) v = w1 S_C c + w2 S_Q q per component.
// Voxels whose accumulated constraint directions cancel are left free. The
// optional `raw` receives the pre-normalization solution.
OrientationField build_orientation_field(const StrandSet& best, const QueryStrands& query,
                                         const TriangleMesh& head, const SceneConfig& cfg,
                                         std::vector<Vec3>* raw = nullptr);

// Euler-integrates the field from every scalp root (step = one voxel edge)
// until the magnitude drops under regrow_min_magnitude, the grid is left,
// the step would pierce the head, or regrow_max_steps is reached. Strands
// with fewer than two vertices are dropped.
StrandSet regrow_strands(const OrientationField& field, const TriangleMesh& head,
                         const SceneConfig& cfg);

}  // namespace hairrec
