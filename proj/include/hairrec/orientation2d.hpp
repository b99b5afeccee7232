#pragma once

#include "hairrec/camera.hpp"
#include "hairrec/core.hpp"
#include "hairrec/raster.hpp"
#include "hairrec/scene.hpp"

#include <vector>

namespace hairrec {

// Undirected per-pixel orientation estimate over the hair mask.
struct OrientationMap {
  FloatRaster theta;     // [0, pi); meaningful only where defined
  FloatRaster response;  // max filter-response magnitude
  MaskRaster defined;    // 255 where theta is defined (hair pixels)

  OrientationMap(int w, int h) : theta(w, h), response(w, h), defined(w, h) {}
};

// 2D pixel-space polyline traced on an orientation map.
struct Strand2D {
  std::vector<Vec2> points;
  bool directed = false;
  bool ambiguous = false;  // direction vote had no labeled points

  Vec2 march_direction(size_t i) const {
    const size_t n = points.size();
    const size_t a = i + 1 < n ? i : n - 2;
    return (points[a + 1] - points[a]).normalized();
  }
};

// One frame per azimuth bin of width cfg.frame_bin_width over [min, max]
// azimuth, choosing the frame nearest each bin center. Returns frame ids.
std::vector<int> select_frames(const std::vector<CameraFrame>& frames, const SceneConfig& cfg);

// Even-symmetric oriented bandpass bank, orientations k*pi/n for k in [0, n).
// Kernels are mean-subtracted so flat regions give zero response.
class FilterBank {
 public:
  FilterBank(int n_filters, int ksize, double wavelength);

  int count() const { return static_cast<int>(kernels_.size()); }
  int ksize() const { return ksize_; }
  double orientation(int k) const { return k * kPi / count(); }
  const std::vector<float>& kernel(int k) const { return kernels_[k]; }

 private:
  int ksize_;
  std::vector<std::vector<float>> kernels_;  // row-major ksize x ksize
};

// Per hair pixel: the bank orientation with the maximum absolute response
// (ties to the lowest filter index). Border pixels sample the image clamped.
OrientationMap orientation_map(const FloatRaster& image, const MaskRaster& mask,
                               const FilterBank& bank);

struct TraceParams {
  double step_px = 1.0;
  double response_frac = 0.1;   // rho_min = frac * max response over the map
  double max_turn_deg = 15.0;   // per step
  double min_length_px = 20.0;

  static TraceParams from_config(const SceneConfig& cfg) {
    return {cfg.trace_step_px, cfg.trace_response_frac, cfg.trace_max_turn_deg,
            cfg.trace_min_length_px};
  }
};

// Seeds at local response maxima in raster order (skipping pixels within 1 px
// of an already-traced strand), marches both ways along the orientation with
// doubled-angle interpolation. Undirected output.
std::vector<Strand2D> trace_strands(const OrientationMap& map, const MaskRaster& mask,
                                    const TraceParams& params);

// Majority vote of marching-direction quadrants against dir_labels bins:
// flipped when more than half of the labeled points land in the opposite bin.
// Strands with no labeled point are left unflipped and marked ambiguous.
std::vector<Strand2D> orient_strands(const std::vector<Strand2D>& strands,
                                     const LabelRaster& labels);

}  // namespace hairrec
