#pragma once

// Shared helpers for the test binaries: scratch directories under the test
// working directory, byte-level file comparison, deterministic RNG wrappers,
// and small geometry builders.

#include "hairrec/camera.hpp"
#include "hairrec/core.hpp"
#include "hairrec/mesh.hpp"
#include "hairrec/strand.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace testutil {

// Fresh per-test scratch directory under ./work; wiped on every call.
inline std::filesystem::path fresh_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path("work") / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), "cannot open " << p.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline bool bytes_equal(const std::filesystem::path& a, const std::filesystem::path& b) {
  return slurp(a) == slurp(b);
}

// Camera on a horizontal ring around the origin, looking at the origin, +y
// world pointing up (image y runs down). Azimuth 0 places it on +z.
inline hairrec::Camera ring_camera(double azimuth, double distance, double focal,
                                   int image_size) {
  hairrec::Camera cam;
  cam.fx = cam.fy = focal;
  cam.cx = cam.cy = (image_size - 1) / 2.0;
  const double sa = std::sin(azimuth), ca = std::cos(azimuth);
  cam.R.row(0) = hairrec::Vec3(ca, 0.0, -sa).transpose();
  cam.R.row(1) = hairrec::Vec3(0.0, -1.0, 0.0).transpose();
  cam.R.row(2) = hairrec::Vec3(-sa, 0.0, -ca).transpose();
  cam.t = hairrec::Vec3(0.0, 0.0, distance);
  return cam;
}

// Random rotation from three uniform angles (deterministic given the engine).
inline hairrec::Mat3 random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-hairrec::kPi, hairrec::kPi);
  const double a = u(rng), b = u(rng), c = u(rng);
  Eigen::AngleAxisd ra(a, hairrec::Vec3::UnitX());
  Eigen::AngleAxisd rb(b, hairrec::Vec3::UnitY());
  Eigen::AngleAxisd rc(c, hairrec::Vec3::UnitZ());
  return (ra * rb * rc).toRotationMatrix();
}

inline hairrec::Vec3 random_vec(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return hairrec::Vec3(u(rng), u(rng), u(rng));
}

// Polyline strand through the given points, tangents recomputed.
inline hairrec::Strand make_strand(const std::vector<hairrec::Vec3>& pts) {
  hairrec::Strand s;
  s.vertices = pts;
  s.recompute_tangents();
  return s;
}

// Straight strand from `from` toward `dir` with n vertices spaced by step.
inline hairrec::Strand line_strand(const hairrec::Vec3& from, const hairrec::Vec3& dir,
                                   int n, double step) {
  std::vector<hairrec::Vec3> pts;
  const hairrec::Vec3 d = dir.normalized();
  for (int i = 0; i < n; ++i) pts.push_back(from + step * i * d);
  return make_strand(pts);
}

// Frame holding the exact silhouette of a sphere at the origin: a pixel is
// inside the mask iff the ray through its center passes within `radius` of
// the origin. hair_prob / depth / dir_labels are left zeroed.
inline hairrec::CameraFrame sphere_silhouette_frame(int frame_id, double azimuth,
                                                    double radius, double distance,
                                                    double focal, int image_size) {
  hairrec::CameraFrame f;
  f.frame_id = frame_id;
  f.camera = ring_camera(azimuth, distance, focal, image_size);
  f.azimuth = hairrec::camera_azimuth(f.camera);
  f.mask = hairrec::MaskRaster(image_size, image_size);
  f.hair_prob = hairrec::FloatRaster(image_size, image_size);
  f.depth = hairrec::FloatRaster(image_size, image_size);
  f.dir_labels = hairrec::LabelRaster(image_size, image_size);
  const hairrec::Vec3 c = f.camera.center();
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      const hairrec::Vec3 dir =
          (f.camera.unproject(hairrec::Vec2(x, y), 1.0) - c).normalized();
      if (c.cross(dir).norm() <= radius && dir.dot(-c) > 0.0) f.mask.at(x, y) = 255;
    }
  }
  return f;
}

// Mean over a's vertices of the distance to the nearest vertex of b.
inline double mean_nearest_vertex_distance(const hairrec::StrandSet& a,
                                           const std::vector<hairrec::Vec3>& b_points) {
  double sum = 0.0;
  long count = 0;
  for (const auto& s : a.strands) {
    for (const auto& v : s.vertices) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : b_points) best = std::min(best, (v - q).norm());
      sum += best;
      ++count;
    }
  }
  return count > 0 ? sum / count : 0.0;
}

}  // namespace testutil
