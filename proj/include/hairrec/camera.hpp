#pragma once

#include "hairrec/core.hpp"
#include "hairrec/raster.hpp"

#include <optional>
#include <string>

namespace hairrec {

// Pinhole camera: X_cam = R * w + t, depth = X_cam.z, pixel centers at integer
// coordinates, origin top-left, x right, y down.
struct Camera {
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();

  Vec3 to_camera(const Vec3& w) const { return R * w + t; }
  Vec3 center() const { return -(R.transpose() * t); }

  // Projects a world point; nothing when it lies at or behind the camera.
  std::optional<Vec2> project(const Vec3& w, double* depth = nullptr) const {
    const Vec3 c = to_camera(w);
    if (c.z() <= 0.0) return std::nullopt;
    if (depth) *depth = c.z();
    return Vec2(fx * c.x() / c.z() + cx, fy * c.y() / c.z() + cy);
  }

  Vec3 unproject(const Vec2& px, double depth) const {
    if (depth <= 0.0) throw Error(ErrorKind::Argument, "unproject: depth must be positive");
    const Vec3 cam((px.x() - cx) / fx * depth, (px.y() - cy) / fy * depth, depth);
    return R.transpose() * (cam - t);
  }
};

// Azimuth of the camera position around the vertical (+y) axis through
// `origin`: 0 along +z (frontal), pi/2 along +x, wrapped to (-pi, pi].
// Throws DegenerateGeometry when the center sits on the vertical axis.
double camera_azimuth(const Camera& cam, const Vec3& origin = Vec3::Zero());

// Per-frame capture inputs; raster layers share one resolution.
struct CameraFrame {
  int frame_id = 0;
  Camera camera;
  double azimuth = 0.0;  // camera_azimuth about the scene origin
  MaskRaster mask{1, 1};           // 0 outside, 255 inside the subject
  FloatRaster hair_prob{1, 1};     // [0, 1]
  FloatRaster depth{1, 1};         // 0 = no measurement
  LabelRaster dir_labels{1, 1};    // 0 none, 1..4 quadrant bin, 5 undetermined
  std::optional<ColorRaster> color;

  int width() const { return mask.width(); }
  int height() const { return mask.height(); }
};

void validate_frame(const CameraFrame& f);

}  // namespace hairrec
