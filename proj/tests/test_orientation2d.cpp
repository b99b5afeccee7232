#include "doctest.h"

#include "hairrec/orientation2d.hpp"
#include "test_util.hpp"

#include <cmath>
#include <vector>

using namespace hairrec;

namespace {

double mod_pi_distance(double a, double b) {
  double d = std::abs(wrap_angle(a - b));
  return std::min(d, kPi - d);
}

CameraFrame azimuth_frame(int id, double az_deg) {
  CameraFrame f;
  f.frame_id = id;
  f.azimuth = az_deg * kPi / 180.0;
  return f;
}

// Sinusoidal stripes running along direction `theta` (intensity varies
// perpendicular to the stripes).
FloatRaster stripe_image(int size, double theta, double wavelength) {
  FloatRaster img(size, size);
  const double nx = -std::sin(theta), ny = std::cos(theta);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x)
      img.at(x, y) = static_cast<float>(
          0.5 + 0.5 * std::sin(2.0 * kPi * (x * nx + y * ny) / wavelength));
  return img;
}

// Bright ridge of unit peak intensity along y = f(x), Gaussian cross-section.
template <typename F>
FloatRaster ridge_image(int w, int h, F curve_y, double sigma = 1.2) {
  FloatRaster img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = y - curve_y(static_cast<double>(x));
      img.at(x, y) = static_cast<float>(std::exp(-d * d / (2.0 * sigma * sigma)));
    }
  }
  return img;
}

MaskRaster full_mask(int w, int h) { return MaskRaster(w, h, 255); }

Strand2D strand2d(const std::vector<Vec2>& pts) {
  Strand2D s;
  s.points = pts;
  return s;
}

}  // namespace

TEST_CASE("select_frames picks the frame nearest each bin center") {
  SceneConfig cfg;  // bin width pi/8 = 22.5 deg

  SUBCASE("three frames spanning 60 degrees fill three bins") {
    std::vector<CameraFrame> frames{azimuth_frame(0, 0.0), azimuth_frame(1, 30.0),
                                    azimuth_frame(2, 60.0)};
    CHECK(select_frames(frames, cfg) == std::vector<int>{0, 1, 2});
  }

  SUBCASE("a dense half ring is thinned to one frame per bin") {
    std::vector<CameraFrame> frames;
    for (int k = 0; k < 19; ++k) frames.push_back(azimuth_frame(k, -90.0 + 10.0 * k));
    // bins of 22.5 deg over [-90, 90]; centers at -78.75, -56.25, ... , 78.75
    const std::vector<int> kept = select_frames(frames, cfg);
    CHECK(kept == std::vector<int>{1, 3, 6, 8, 10, 12, 15, 17});
  }

  SUBCASE("ties go to the lower frame id") {
    std::vector<CameraFrame> frames{azimuth_frame(7, 0.0), azimuth_frame(3, 22.5)};
    CHECK(select_frames(frames, cfg) == std::vector<int>{3});
  }

  SUBCASE("a single frame selects itself") {
    std::vector<CameraFrame> frames{azimuth_frame(4, 33.0)};
    CHECK(select_frames(frames, cfg) == std::vector<int>{4});
  }
}

TEST_CASE("filter bank is mean-free and evenly spaced") {
  const FilterBank bank(32, 17, 4.0);
  CHECK(bank.count() == 32);
  CHECK(bank.ksize() == 17);
  for (int k = 0; k < bank.count(); ++k) {
    CHECK(bank.orientation(k) == doctest::Approx(k * kPi / 32.0).epsilon(1e-12));
    REQUIRE(bank.kernel(k).size() == 17u * 17u);
    double sum = 0.0;
    for (float v : bank.kernel(k)) sum += v;
    CHECK(std::abs(sum) < 1e-4);  // flat regions give zero response
  }
}

TEST_CASE("a constant image has zero response") {
  const FilterBank bank(32, 17, 4.0);
  const FloatRaster img(48, 48, 0.7f);
  const OrientationMap map = orientation_map(img, full_mask(48, 48), bank);
  for (int y = 0; y < 48; ++y) {
    for (int x = 0; x < 48; ++x) {
      CHECK(map.defined.at(x, y) == 255);
      CHECK(std::abs(map.response.at(x, y)) < 1e-4);
    }
  }
}

TEST_CASE("orientation is undefined outside the mask") {
  const FilterBank bank(8, 9, 4.0);
  const FloatRaster img = stripe_image(32, 0.0, 4.0);
  MaskRaster mask(32, 32);
  for (int x = 0; x < 32; ++x) mask.at(x, 5) = 255;
  const OrientationMap map = orientation_map(img, mask, bank);
  int defined = 0;
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) defined += map.defined.at(x, y) == 255;
  CHECK(defined == 32);
  CHECK(map.defined.at(3, 4) == 0);
  CHECK(map.defined.at(3, 5) == 255);
}

TEST_CASE("stripe orientations are recovered within five degrees") {
  // Stripe pixels are the ones carrying observable stripe signal: filter
  // support fully inside the image and response at least 10% of the map peak
  // (the same usability threshold tracing applies). A sinusoid's zero-crossing
  // lines have an even-filter response of zero and carry no orientation.
  const FilterBank bank(32, 17, 4.0);
  const int size = 96, margin = bank.ksize() / 2;
  std::vector<double> angles;
  for (int k = 0; k < 8; ++k) angles.push_back(k * kPi / 8.0);
  angles.push_back(0.4);  // off the filter grid
  angles.push_back(1.7);

  for (double theta : angles) {
    CAPTURE(theta);
    const FloatRaster img = stripe_image(size, theta, 4.0);
    const OrientationMap map = orientation_map(img, full_mask(size, size), bank);
    float max_response = 0.0f;
    for (float r : map.response.data()) max_response = std::max(max_response, r);
    REQUIRE(max_response > 0.0f);
    int good = 0, total = 0;
    for (int y = margin; y < size - margin; ++y) {
      for (int x = margin; x < size - margin; ++x) {
        if (map.response.at(x, y) < 0.1f * max_response) continue;
        ++total;
        if (mod_pi_distance(map.theta.at(x, y), theta) <= kPi / 36.0) ++good;
      }
    }
    REQUIRE(total > size);
    CHECK(static_cast<double>(good) / total >= 0.95);
  }
}

TEST_CASE("rotating the stripes by one filter step shifts the modal angle by one step") {
  const FilterBank bank(32, 17, 4.0);
  const int size = 96, margin = bank.ksize() / 2;
  const double base = 0.9, step = kPi / 32.0;

  const auto modal_theta = [&](double theta) {
    const FloatRaster img = stripe_image(size, theta, 4.0);
    const OrientationMap map = orientation_map(img, full_mask(size, size), bank);
    float max_response = 0.0f;
    for (float r : map.response.data()) max_response = std::max(max_response, r);
    std::vector<int> votes(bank.count(), 0);
    for (int y = margin; y < size - margin; ++y) {
      for (int x = margin; x < size - margin; ++x) {
        if (map.response.at(x, y) < 0.1f * max_response) continue;
        int nearest = 0;
        double best = 1e9;
        for (int k = 0; k < bank.count(); ++k) {
          const double d = mod_pi_distance(map.theta.at(x, y), bank.orientation(k));
          if (d < best) {
            best = d;
            nearest = k;
          }
        }
        ++votes[nearest];
      }
    }
    int mode = 0;
    for (int k = 1; k < bank.count(); ++k)
      if (votes[k] > votes[mode]) mode = k;
    return bank.orientation(mode);
  };

  const double shift = mod_pi_distance(modal_theta(base + step), modal_theta(base));
  CHECK(std::abs(shift - step) <= kPi / 72.0);
}

TEST_CASE("strands traced on a straight stripe field are straight and aligned") {
  const int w = 128, h = 128;
  const FilterBank bank(32, 17, 4.0);
  TraceParams params;

  for (double theta : {0.0, 0.5236, 2.0}) {
    CAPTURE(theta);
    const FloatRaster img = stripe_image(w, theta, 4.0);
    const OrientationMap map = orientation_map(img, full_mask(w, h), bank);
    const auto strands = trace_strands(map, full_mask(w, h), params);
    REQUIRE(!strands.empty());

    size_t longest = 0;
    for (const auto& s : strands) {
      REQUIRE(s.points.size() >= 2);
      CHECK_FALSE(s.directed);
      CHECK((s.points.size() - 1) * params.step_px >= params.min_length_px);
      longest = std::max(longest, s.points.size());

      const Vec2 a = s.points.front();
      const Vec2 d = (s.points.back() - a).normalized();
      // stripe-axis alignment within five degrees, undirected
      CHECK(mod_pi_distance(std::atan2(d.y(), d.x()), theta) <= kPi / 36.0);
      // straightness: every point within 2 px of the strand's own chord
      for (const auto& p : s.points) {
        const Vec2 r = p - a;
        CHECK(std::abs(r.x() * d.y() - r.y() * d.x()) <= 2.0);
      }
    }
    CHECK(longest >= 101);  // straightness is exercised over > 100 px
  }
}

TEST_CASE("strands traced on a sinusoidal stripe field follow the generating curves") {
  const int w = 128, h = 128;
  const double amp = 6.0, period = 64.0;
  // stripes generated by y = amp * sin(2 pi x / period) + const
  FloatRaster img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.at(x, y) = static_cast<float>(
          0.5 + 0.5 * std::sin(2.0 * kPi * (y - amp * std::sin(2.0 * kPi * x / period)) / 4.0));

  const FilterBank bank(32, 17, 4.0);
  const OrientationMap map = orientation_map(img, full_mask(w, h), bank);
  const auto strands = trace_strands(map, full_mask(w, h), TraceParams{});
  REQUIRE(!strands.empty());

  const auto base = [&](double x) { return amp * std::sin(2.0 * kPi * x / period); };
  int long_strands = 0;
  double max_span = 0.0;
  for (const auto& s : strands) {
    if (s.points.size() < 40) continue;
    ++long_strands;
    // phase offset of the generating curve this strand follows
    double c = 0.0;
    for (const auto& p : s.points) c += p.y() - base(p.x());
    c /= static_cast<double>(s.points.size());
    double x_min = 1e18, x_max = -1e18;
    for (const auto& p : s.points) {
      CHECK(std::abs(p.y() - (base(p.x()) + c)) <= 2.0);
      x_min = std::min(x_min, p.x());
      x_max = std::max(x_max, p.x());
    }
    max_span = std::max(max_span, x_max - x_min);
  }
  CHECK(long_strands >= 10);
  CHECK(max_span >= period);  // shape is followed across at least a full period
}

TEST_CASE("short ridges are discarded by the length threshold") {
  const int w = 64, h = 64;
  // a ridge only 12 px long (min length is 20 px)
  FloatRaster img(w, h);
  for (int x = 26; x < 38; ++x)
    for (int y = 30; y <= 34; ++y) {
      const double d = y - 32.0;
      img.at(x, y) = static_cast<float>(std::exp(-d * d / (2.0 * 1.2 * 1.2)));
    }
  const FilterBank bank(32, 17, 4.0);
  const OrientationMap map = orientation_map(img, full_mask(w, h), bank);
  const auto strands = trace_strands(map, full_mask(w, h), TraceParams{});
  CHECK(strands.empty());
}

TEST_CASE("an empty response map yields no strands") {
  const FilterBank bank(32, 17, 4.0);
  const FloatRaster img(64, 64, 0.0f);
  const OrientationMap map = orientation_map(img, full_mask(64, 64), bank);
  const auto strands = trace_strands(map, full_mask(64, 64), TraceParams{});
  CHECK(strands.empty());
}

TEST_CASE("tracing is deterministic") {
  const int w = 96, h = 96;
  const auto curve = [](double x) { return 40.0 + 8.0 * std::sin(2.0 * kPi * x / 48.0); };
  const FloatRaster img = ridge_image(w, h, curve);
  const FilterBank bank(32, 17, 4.0);
  const OrientationMap map = orientation_map(img, full_mask(w, h), bank);
  const auto a = trace_strands(map, full_mask(w, h), TraceParams{});
  const auto b = trace_strands(map, full_mask(w, h), TraceParams{});
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    REQUIRE(a[i].points.size() == b[i].points.size());
    for (size_t j = 0; j < a[i].points.size(); ++j)
      CHECK((a[i].points[j] - b[i].points[j]).norm() == 0.0);
  }
}

TEST_CASE("direction vote flips strands against the labels") {
  // strand marching toward +x: tangent quadrant bin 0
  std::vector<Vec2> pts;
  for (int i = 0; i < 5; ++i) pts.emplace_back(10.0 + i, 10.0);

  SUBCASE("labels agreeing with the march leave it alone") {
    LabelRaster labels(32, 32, 1);  // bin 0
    const auto out = orient_strands({strand2d(pts)}, labels);
    REQUIRE(out.size() == 1);
    CHECK(out[0].directed);
    CHECK_FALSE(out[0].ambiguous);
    CHECK(out[0].points.front() == pts.front());
    CHECK(out[0].points.back() == pts.back());
  }
  SUBCASE("opposite labels reverse the points") {
    LabelRaster labels(32, 32, 3);  // bin 2, opposite of 0
    const auto out = orient_strands({strand2d(pts)}, labels);
    REQUIRE(out.size() == 1);
    CHECK(out[0].directed);
    CHECK_FALSE(out[0].ambiguous);
    CHECK(out[0].points.front() == pts.back());
    CHECK(out[0].points.back() == pts.front());
  }
  SUBCASE("perpendicular labels never count as disagreement") {
    LabelRaster labels(32, 32, 2);  // bin 1
    const auto out = orient_strands({strand2d(pts)}, labels);
    CHECK(out[0].points.front() == pts.front());
    CHECK_FALSE(out[0].ambiguous);
  }
  SUBCASE("majority of opposite labels wins") {
    LabelRaster labels(32, 32, 1);
    labels.at(10, 10) = 3;
    labels.at(11, 10) = 3;
    labels.at(12, 10) = 3;  // 3 of 5 disagree
    const auto out = orient_strands({strand2d(pts)}, labels);
    CHECK(out[0].points.front() == pts.back());
  }
  SUBCASE("a minority of opposite labels does not win") {
    LabelRaster labels(32, 32, 1);
    labels.at(10, 10) = 3;
    labels.at(11, 10) = 3;  // 2 of 5 disagree
    const auto out = orient_strands({strand2d(pts)}, labels);
    CHECK(out[0].points.front() == pts.front());
  }
  SUBCASE("an exact split does not flip") {
    std::vector<Vec2> four;
    for (int i = 0; i < 4; ++i) four.emplace_back(10.0 + i, 10.0);
    LabelRaster labels(32, 32, 1);
    labels.at(10, 10) = 3;
    labels.at(11, 10) = 3;  // 2 of 4 disagree
    const auto out = orient_strands({strand2d(four)}, labels);
    CHECK(out[0].points.front() == four.front());
  }
  SUBCASE("unlabeled and undetermined pixels leave the strand ambiguous") {
    for (uint8_t fill : {uint8_t{0}, uint8_t{5}}) {
      LabelRaster labels(32, 32, fill);
      const auto out = orient_strands({strand2d(pts)}, labels);
      CHECK(out[0].directed);
      CHECK(out[0].ambiguous);
      CHECK(out[0].points.front() == pts.front());
    }
  }
  SUBCASE("a one-point strand is passed through as ambiguous") {
    LabelRaster labels(32, 32, 1);
    const auto out = orient_strands({strand2d({Vec2(5, 5)})}, labels);
    CHECK(out[0].directed);
    CHECK(out[0].ambiguous);
  }
}

TEST_CASE("direction vote handles a downward marcher") {
  // marching toward +y (image down): angle pi/2 -> bin 1; label 4 (bin 3) is
  // its opposite
  std::vector<Vec2> pts;
  for (int i = 0; i < 5; ++i) pts.emplace_back(10.0, 10.0 + i);
  LabelRaster labels(32, 32, 4);
  const auto out = orient_strands({strand2d(pts)}, labels);
  CHECK(out[0].points.front() == pts.back());
}
