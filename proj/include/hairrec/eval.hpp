#pragma once

#include "hairrec/camera.hpp"
#include "hairrec/core.hpp"
#include "hairrec/mesh.hpp"
#include "hairrec/raster.hpp"
#include "hairrec/strand.hpp"

#include <vector>

namespace hairrec {

// Per-vertex color averaged over every color-carrying frame that passes the
// depth-visibility test (projected depth within `depth_tolerance` of the
// frame's depth layer). Vertices visible nowhere receive the mean color of
// the visible ones; when nothing is visible at all, everything turns
// mid-gray and a warning is printed.
StrandSet strand_colors(const StrandSet& strands, const std::vector<CameraFrame>& frames,
                        double depth_tolerance);

// Strands drawn as lines of width `width_px` into a binary raster.
MaskRaster rasterize_strand_mask(const StrandSet& strands, const Camera& camera, int width,
                                 int height, double width_px);

// Intersection-over-union of the rasterized strand projection against a
// ground-truth mask. Both empty -> 1.0.
double evaluate_iou(const StrandSet& strands, const CameraFrame& frame,
                    const MaskRaster& gt_mask, double width_px);

// Per-channel multiply, clamped to [0, 1]. Uncolored strands pass through.
StrandSet recolor(const StrandSet& strands, double factor);

// Vertexwise interpolation (1-t) a + t b over index-corresponded strands.
// When the head carries a `face` flag channel, strands are cut before their
// first vertex inside the face submesh; survivors need >= 2 vertices.
StrandSet morph(const StrandSet& a, const StrandSet& b, double t, const TriangleMesh& head);

}  // namespace hairrec
