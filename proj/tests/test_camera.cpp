#include "doctest.h"

#include "hairrec/camera.hpp"
#include "test_util.hpp"

#include <random>

using namespace hairrec;

namespace {

Camera identity_camera() {
  Camera cam;
  cam.fx = cam.fy = 100.0;
  cam.cx = cam.cy = 50.0;
  return cam;
}

CameraFrame minimal_frame(int w = 4, int h = 4) {
  CameraFrame f;
  f.frame_id = 1;
  f.camera = testutil::ring_camera(0.3, 0.5, 100.0, w);
  f.azimuth = camera_azimuth(f.camera);
  f.mask = MaskRaster(w, h);
  f.hair_prob = FloatRaster(w, h);
  f.depth = FloatRaster(w, h);
  f.dir_labels = LabelRaster(w, h);
  return f;
}

}  // namespace

TEST_CASE("projection of on-axis and off-axis points") {
  const Camera cam = identity_camera();

  double depth = 0.0;
  auto px = cam.project(Vec3(0, 0, 1), &depth);
  REQUIRE(px.has_value());
  CHECK(px->x() == doctest::Approx(50.0));
  CHECK(px->y() == doctest::Approx(50.0));
  CHECK(depth == doctest::Approx(1.0));

  px = cam.project(Vec3(1, 0, 1));
  REQUIRE(px.has_value());
  CHECK(px->x() == doctest::Approx(150.0));
  CHECK(px->y() == doctest::Approx(50.0));

  // Points at or behind the camera are flagged, never wrapped around.
  CHECK_FALSE(cam.project(Vec3(0, 0, 0)).has_value());
  CHECK_FALSE(cam.project(Vec3(0, 0, -1)).has_value());
}

TEST_CASE("unprojection inverts projection on the optical axis") {
  const Camera cam = identity_camera();
  const Vec3 p = cam.unproject(Vec2(50, 50), 1.0);
  CHECK((p - Vec3(0, 0, 1)).norm() < 1e-12);

  for (double d : {0.25, 1.0, 7.5}) {
    const Vec3 q = cam.unproject(Vec2(50, 50), d);
    CHECK(q.x() == doctest::Approx(0.0));
    CHECK(q.y() == doctest::Approx(0.0));
    CHECK(q.z() == doctest::Approx(d));
  }

  CHECK_THROWS_AS(cam.unproject(Vec2(10, 10), 0.0), Error);
  CHECK_THROWS_AS(cam.unproject(Vec2(10, 10), -1.0), Error);
}

TEST_CASE("project and unproject are mutual inverses under random poses") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> upix(0.0, 256.0);
  std::uniform_real_distribution<double> udepth(0.05, 4.0);

  for (int i = 0; i < 10000; ++i) {
    Camera cam;
    cam.fx = 200.0 + (i % 7) * 10.0;
    cam.fy = 210.0 + (i % 5) * 10.0;
    cam.cx = 128.0;
    cam.cy = 120.0;
    cam.R = testutil::random_rotation(rng);
    cam.t = testutil::random_vec(rng, -1.0, 1.0);

    const Vec2 px(upix(rng), upix(rng));
    const double d = udepth(rng);
    const Vec3 world = cam.unproject(px, d);

    double d2 = 0.0;
    const auto px2 = cam.project(world, &d2);
    REQUIRE(px2.has_value());
    CHECK((*px2 - px).norm() < 1e-9);
    CHECK(std::abs(d2 - d) < 1e-9);
  }
}

TEST_CASE("camera_azimuth convention: 0 frontal, pi/2 at +x") {
  Camera frontal;
  frontal.R = Mat3::Identity();
  frontal.t = Vec3(0, 0, -5);  // center at +5z
  CHECK(frontal.center().z() == doctest::Approx(5.0));
  CHECK(camera_azimuth(frontal) == doctest::Approx(0.0));

  Camera side;
  side.R = Mat3::Identity();
  side.t = Vec3(-5, 0, 0);  // center at +5x
  CHECK(camera_azimuth(side) == doctest::Approx(kPi / 2.0));

  Camera on_axis;
  on_axis.R = Mat3::Identity();
  on_axis.t = Vec3(0, -3, 0);
  CHECK_THROWS_AS(camera_azimuth(on_axis), Error);
}

TEST_CASE("ring of 36 cameras has uniform azimuth spacing") {
  std::vector<double> az;
  for (int k = 0; k < 36; ++k) {
    const double a = -kPi + 2.0 * kPi * k / 36.0;
    az.push_back(camera_azimuth(testutil::ring_camera(a, 0.5, 100.0, 64)));
    CHECK(std::abs(wrap_angle(az.back() - a)) < 1e-9);
  }
  for (size_t k = 1; k < az.size(); ++k) {
    const double gap = wrap_angle(az[k] - az[k - 1]);
    CHECK(std::abs(gap - kPi / 18.0) < 1e-9);
  }
}

TEST_CASE("camera_azimuth is equivariant under rotation about the vertical axis") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const double base = u(rng), phi = u(rng);
    const Camera a = testutil::ring_camera(base, 0.5, 100.0, 64);
    const Camera b = testutil::ring_camera(base + phi, 0.5, 100.0, 64);
    const double shift = wrap_angle(camera_azimuth(b) - camera_azimuth(a));
    CHECK(std::abs(wrap_angle(shift - phi)) < 1e-9);
  }
}

TEST_CASE("validate_frame accepts a consistent frame") {
  CameraFrame f = minimal_frame();
  CHECK_NOTHROW(validate_frame(f));
}

TEST_CASE("validate_frame rejects inconsistent frames") {
  SUBCASE("non-orthonormal rotation") {
    CameraFrame f = minimal_frame();
    f.camera.R(0, 0) += 0.01;
    CHECK_THROWS_WITH_AS(validate_frame(f), doctest::Contains("not orthonormal"), Error);
  }
  SUBCASE("raster size mismatch names the frame") {
    CameraFrame f = minimal_frame();
    f.depth = FloatRaster(3, 4);
    CHECK_THROWS_WITH_AS(validate_frame(f), doctest::Contains("frame 1"), Error);
  }
  SUBCASE("hair probability outside [0,1]") {
    CameraFrame f = minimal_frame();
    f.hair_prob.at(0, 0) = 1.5f;
    CHECK_THROWS_WITH_AS(validate_frame(f), doctest::Contains("hair_prob"), Error);
  }
  SUBCASE("negative depth") {
    CameraFrame f = minimal_frame();
    f.depth.at(1, 1) = -0.2f;
    CHECK_THROWS_WITH_AS(validate_frame(f), doctest::Contains("negative depth"), Error);
  }
  SUBCASE("direction label out of range") {
    CameraFrame f = minimal_frame();
    f.dir_labels.at(2, 2) = 9;
    CHECK_THROWS_AS(validate_frame(f), Error);
  }
  SUBCASE("stored azimuth must match the pose") {
    CameraFrame f = minimal_frame();
    f.azimuth += 0.05;
    CHECK_THROWS_WITH_AS(validate_frame(f), doctest::Contains("azimuth"), Error);
  }
  SUBCASE("non-positive focal length") {
    CameraFrame f = minimal_frame();
    f.camera.fx = 0.0;
    CHECK_THROWS_AS(validate_frame(f), Error);
  }
}
