#pragma once

#include "hairrec/camera.hpp"
#include "hairrec/core.hpp"
#include "hairrec/mesh.hpp"
#include "hairrec/scene.hpp"
#include "hairrec/voxel_grid.hpp"

#include <vector>

namespace hairrec {

using FrameRefs = std::vector<const CameraFrame*>;
FrameRefs frame_refs(const std::vector<CameraFrame>& frames);

// Valid azimuth range [r1,r2] u [r3,r4]; endpoints kept unwrapped exactly as
// derived from min/max camera azimuth, membership tested modulo 2 pi.
struct ConfidenceRegion {
  double r1 = 0.0, r2 = 0.0, r3 = 0.0, r4 = 0.0;

  bool contains(double angle) const;
  // Wrap-aware angular distance to the region (0 inside).
  double distance(double angle) const;
  // 1 inside the region, Gaussian falloff exp(-d^2 / 2 sigma^2) outside.
  double confidence(double angle, double sigma) const;
};

struct VisualHull {
  VoxelGrid grid;
  TriangleMesh surface;       // gains "hair" / "high_confidence" flags
  int unseen_vertices = 0;    // labeled vertices visible in no frame
};

// Marches the segment from -> to through occupancy; true when an occupied
// voxel is entered more than skip_dist past `from` (self-occlusion guard).
bool grid_segment_blocked(const VoxelGrid& grid, const Vec3& from, const Vec3& to,
                          double skip_dist);

// Frames whose hair-pixel area (hair_prob > threshold) reaches
// blur_area_factor x mean area. Returns kept frame ids; throws EmptyResult
// when every frame fails (all-zero hair area included).
std::vector<int> reject_blurred_frames(const std::vector<CameraFrame>& frames,
                                       const SceneConfig& cfg);

// Cubic carving grid centered on the head: edge = hull_bounds_scale x the
// head mesh's largest extent, hull_resolution voxels per side.
VoxelGrid hull_grid_for(const TriangleMesh& head, const SceneConfig& cfg);

// A voxel stays occupied iff its center lands inside the mask of every frame
// where it projects inside the image. Surface extracted from occupancy.
VisualHull carve(const FrameRefs& frames, VoxelGrid grid);

// Mean visible hair probability per surface vertex (hull-occlusion test via
// grid_segment_blocked, bilinear sampling); strict > threshold sets "hair".
void label_hull_hair(VisualHull& hull, const FrameRefs& frames, const SceneConfig& cfg);

// The hair-flagged submesh X_h (faces whose three vertices are flagged).
TriangleMesh hair_submesh(const VisualHull& hull);

// Region from min/max camera azimuth; also flags hull surface vertices whose
// azimuth about the origin lies inside ("high_confidence").
ConfidenceRegion confidence_region(const FrameRefs& frames, VisualHull* hull = nullptr);

}  // namespace hairrec
