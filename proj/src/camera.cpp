#include "hairrec/camera.hpp"

#include <cmath>

namespace hairrec {

double camera_azimuth(const Camera& cam, const Vec3& origin) {
  const Vec3 rel = cam.center() - origin;
  if (std::hypot(rel.x(), rel.z()) < 1e-12)
    throw Error(ErrorKind::DegenerateGeometry, "camera_azimuth: center on the vertical axis");
  return wrap_angle(std::atan2(rel.x(), rel.z()));
}

void validate_frame(const CameraFrame& f) {
  const std::string where = "frame " + std::to_string(f.frame_id);
  if (f.camera.fx <= 0.0 || f.camera.fy <= 0.0)
    throw Error(ErrorKind::Validation, where + ": non-positive focal length");
  const Mat3 rrt = f.camera.R * f.camera.R.transpose();
  if ((rrt - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6)
    throw Error(ErrorKind::Validation, where + ": rotation is not orthonormal");
  if (f.camera.R.determinant() < 0.0)
    throw Error(ErrorKind::Validation, where + ": rotation is a reflection");
  if (std::abs(wrap_angle(f.azimuth - camera_azimuth(f.camera))) > 1e-9)
    throw Error(ErrorKind::Validation, where + ": stored azimuth disagrees with pose");
  const int w = f.mask.width(), h = f.mask.height();
  auto check = [&](int lw, int lh, const char* layer) {
    if (lw != w || lh != h)
      throw Error(ErrorKind::Validation,
                  where + ": layer '" + std::string(layer) + "' resolution mismatch");
  };
  check(f.hair_prob.width(), f.hair_prob.height(), "hair_prob");
  check(f.depth.width(), f.depth.height(), "depth");
  check(f.dir_labels.width(), f.dir_labels.height(), "dir_labels");
  if (f.color) check(f.color->width(), f.color->height(), "color");
  for (int i = 0; i < w * h; ++i) {
    const float p = f.hair_prob.data()[i];
    if (!(p >= 0.0f && p <= 1.0f))
      throw Error(ErrorKind::Validation, where + ": hair_prob outside [0, 1]");
    if (f.dir_labels.data()[i] > 5)
      throw Error(ErrorKind::Validation, where + ": direction label outside 0..5");
    if (!(f.depth.data()[i] >= 0.0f))
      throw Error(ErrorKind::Validation, where + ": negative depth");
  }
}

}  // namespace hairrec
