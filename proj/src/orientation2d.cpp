#include "hairrec/orientation2d.hpp"

#include <algorithm>
#include <cmath>

namespace hairrec {

std::vector<int> select_frames(const std::vector<CameraFrame>& frames, const SceneConfig& cfg) {
  if (frames.empty()) throw Error(ErrorKind::Argument, "select_frames: no frames");
  double lo = frames[0].azimuth, hi = frames[0].azimuth;
  for (const auto& f : frames) {
    lo = std::min(lo, f.azimuth);
    hi = std::max(hi, f.azimuth);
  }
  const double width = cfg.frame_bin_width;
  const double span = hi - lo;
  const int n_bins = std::max(1, static_cast<int>(std::ceil(span / width - 1e-12)));

  std::vector<int> ids;
  for (int b = 0; b < n_bins; ++b) {
    const double center = lo + (b + 0.5) * width;
    int best = -1;
    double best_gap = 0.0;
    for (const auto& f : frames) {
      // Bin membership; the final bin absorbs the right edge.
      const int bin = std::min(
          n_bins - 1, static_cast<int>(std::floor((f.azimuth - lo) / width)));
      if (bin != b) continue;
      const double gap = std::abs(f.azimuth - center);
      if (best < 0 || gap < best_gap - 1e-15 ||
          (std::abs(gap - best_gap) <= 1e-15 && f.frame_id < best)) {
        best = f.frame_id;
        best_gap = gap;
      }
    }
    if (best >= 0) ids.push_back(best);
  }
  return ids;
}

FilterBank::FilterBank(int n_filters, int ksize, double wavelength) : ksize_(ksize) {
  if (n_filters < 4) throw Error(ErrorKind::Argument, "FilterBank: need >= 4 orientations");
  if (ksize < 3 || ksize % 2 == 0)
    throw Error(ErrorKind::Argument, "FilterBank: kernel size must be odd and >= 3");
  if (wavelength <= 0.0) throw Error(ErrorKind::Argument, "FilterBank: wavelength must be > 0");

  // Isotropic envelope keeps the bank rotation-equivariant.
  const double sigma = 0.56 * wavelength;
  const int half = ksize / 2;
  kernels_.resize(n_filters);
  for (int k = 0; k < n_filters; ++k) {
    const double theta = k * kPi / n_filters;       // stripe orientation detected
    const double phi = theta + kPi / 2.0;           // modulation axis
    const double ux = std::cos(phi), uy = std::sin(phi);
    auto& kern = kernels_[k];
    kern.resize(static_cast<size_t>(ksize) * ksize);
    double sum = 0.0;
    for (int y = -half; y <= half; ++y) {
      for (int x = -half; x <= half; ++x) {
        const double along = x * ux + y * uy;
        const double r2 = static_cast<double>(x) * x + static_cast<double>(y) * y;
        const double v =
            std::exp(-r2 / (2.0 * sigma * sigma)) * std::cos(2.0 * kPi * along / wavelength);
        kern[static_cast<size_t>(y + half) * ksize + (x + half)] = static_cast<float>(v);
        sum += v;
      }
    }
    const float mean = static_cast<float>(sum / (static_cast<double>(ksize) * ksize));
    for (auto& v : kern) v -= mean;
  }
}

OrientationMap orientation_map(const FloatRaster& image, const MaskRaster& mask,
                               const FilterBank& bank) {
  if (!image.same_size(mask.width(), mask.height()))
    throw Error(ErrorKind::Argument, "orientation_map: image/mask size mismatch");
  const int w = image.width(), h = image.height();
  OrientationMap map(w, h);
  const int half = bank.ksize() / 2;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) == 0) continue;
      int best = 0;
      double best_mag = -1.0;
      for (int k = 0; k < bank.count(); ++k) {
        const auto& kern = bank.kernel(k);
        double acc = 0.0;
        for (int dy = -half; dy <= half; ++dy) {
          const int sy = std::clamp(y + dy, 0, h - 1);
          const float* kr = kern.data() + static_cast<size_t>(dy + half) * bank.ksize();
          for (int dx = -half; dx <= half; ++dx) {
            const int sx = std::clamp(x + dx, 0, w - 1);
            acc += kr[dx + half] * image.at(sx, sy);
          }
        }
        const double mag = std::abs(acc);
        if (mag > best_mag) {
          best_mag = mag;
          best = k;
        }
      }
      map.theta.at(x, y) = static_cast<float>(bank.orientation(best));
      map.response.at(x, y) = static_cast<float>(best_mag);
      map.defined.at(x, y) = 255;
    }
  }
  return map;
}

namespace {

// Doubled-angle bilinear interpolation of theta over defined pixels around
// (x, y); false when no defined pixel contributes.
bool sample_theta(const OrientationMap& map, double x, double y, double& theta_out) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0, fy = y - y0;
  double cx = 0.0, cy = 0.0, wsum = 0.0;
  for (int dy = 0; dy <= 1; ++dy) {
    for (int dx = 0; dx <= 1; ++dx) {
      const int sx = x0 + dx, sy = y0 + dy;
      if (!map.defined.contains(sx, sy) || map.defined.at(sx, sy) == 0) continue;
      const double wgt = (dx ? fx : 1.0 - fx) * (dy ? fy : 1.0 - fy);
      if (wgt <= 0.0) continue;
      const double th2 = 2.0 * map.theta.at(sx, sy);
      cx += wgt * std::cos(th2);
      cy += wgt * std::sin(th2);
      wsum += wgt;
    }
  }
  if (wsum <= 0.0 || (cx == 0.0 && cy == 0.0)) return false;
  double th = 0.5 * std::atan2(cy, cx);
  if (th < 0.0) th += kPi;
  theta_out = th;
  return true;
}

bool inside_mask(const MaskRaster& mask, double x, double y) {
  const int px = nearest_px(x), py = nearest_px(y);
  return mask.contains(px, py) && mask.at(px, py) != 0;
}

}  // namespace

std::vector<Strand2D> trace_strands(const OrientationMap& map, const MaskRaster& mask,
                                    const TraceParams& params) {
  const int w = mask.width(), h = mask.height();
  std::vector<Strand2D> out;

  float max_resp = 0.0f;
  for (int i = 0; i < w * h; ++i)
    if (map.defined.data()[i]) max_resp = std::max(max_resp, map.response.data()[i]);
  if (max_resp <= 0.0f) return out;
  const double rho_min = params.response_frac * max_resp;
  const double cos_max_turn = std::cos(params.max_turn_deg * kPi / 180.0);

  MaskRaster covered(w, h);
  auto is_covered_near = [&](int x, int y) {
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int sx = x + dx, sy = y + dy;
        if (covered.contains(sx, sy) && covered.at(sx, sy)) return true;
      }
    return false;
  };
  auto is_local_max = [&](int x, int y) {
    const float v = map.response.at(x, y);
    if (v < rho_min) return false;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int sx = x + dx, sy = y + dy;
        if (!map.defined.contains(sx, sy) || map.defined.at(sx, sy) == 0) continue;
        if (map.response.at(sx, sy) > v) return false;
      }
    return true;
  };

  // March from (seed, dir); the seed itself is excluded from the result.
  auto march = [&](Vec2 pos, Vec2 dir) {
    std::vector<Vec2> pts;
    const int max_steps = 4 * (w + h);
    for (int s = 0; s < max_steps; ++s) {
      const Vec2 next = pos + params.step_px * dir;
      if (!inside_mask(mask, next.x(), next.y())) break;
      double th;
      if (!sample_theta(map, next.x(), next.y(), th)) break;
      if (bilinear(map.response, next.x(), next.y()) < rho_min) break;
      Vec2 ndir(std::cos(th), std::sin(th));
      if (ndir.dot(dir) < 0.0) ndir = -ndir;
      if (ndir.dot(dir) < cos_max_turn) break;
      pts.push_back(next);
      pos = next;
      dir = ndir;
    }
    return pts;
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (map.defined.at(x, y) == 0 || is_covered_near(x, y) || !is_local_max(x, y)) continue;
      const Vec2 seed(x, y);
      const double th = map.theta.at(x, y);
      const Vec2 dir(std::cos(th), std::sin(th));
      const auto fwd = march(seed, dir);
      const auto bwd = march(seed, -dir);

      Strand2D strand;
      strand.points.reserve(bwd.size() + 1 + fwd.size());
      for (auto it = bwd.rbegin(); it != bwd.rend(); ++it) strand.points.push_back(*it);
      strand.points.push_back(seed);
      strand.points.insert(strand.points.end(), fwd.begin(), fwd.end());

      const double length = (strand.points.size() - 1) * params.step_px;
      if (strand.points.size() < 2 || length < params.min_length_px) continue;
      for (const auto& p : strand.points) {
        const int cx = nearest_px(p.x()), cy = nearest_px(p.y());
        if (covered.contains(cx, cy)) covered.at(cx, cy) = 255;
      }
      out.push_back(std::move(strand));
    }
  }
  return out;
}

std::vector<Strand2D> orient_strands(const std::vector<Strand2D>& strands,
                                     const LabelRaster& labels) {
  std::vector<Strand2D> out;
  out.reserve(strands.size());
  for (const auto& s : strands) {
    Strand2D r = s;
    if (r.points.size() < 2) {
      r.directed = true;
      r.ambiguous = true;
      out.push_back(std::move(r));
      continue;
    }
    int labeled = 0, disagree = 0;
    for (size_t i = 0; i < r.points.size(); ++i) {
      const int px = nearest_px(r.points[i].x()), py = nearest_px(r.points[i].y());
      if (!labels.contains(px, py)) continue;
      const uint8_t label = labels.at(px, py);
      if (label < 1 || label > 4) continue;  // background / undetermined
      ++labeled;
      const Vec2 d = r.march_direction(i);
      double ang = std::atan2(d.y(), d.x());
      if (ang < 0.0) ang += 2.0 * kPi;
      const int tangent_bin = std::min(3, static_cast<int>(ang / (kPi / 2.0)));
      const int label_bin = label - 1;
      if (tangent_bin == (label_bin + 2) % 4) ++disagree;
    }
    if (labeled == 0) {
      r.ambiguous = true;
    } else if (2 * disagree > labeled) {
      std::reverse(r.points.begin(), r.points.end());
    }
    r.directed = true;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hairrec
