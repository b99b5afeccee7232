#pragma once

#include "hairrec/core.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace hairrec {

// Row-major 2D grid. Pixel centers sit at integer coordinates, (0,0) top-left,
// x = column, y = row.
template <typename T>
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0)
      throw Error(ErrorKind::Argument, "raster dimensions must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }

  T& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  const T& at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }

  bool contains(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }
  bool contains(const Vec2& p) const {
    return p.x() >= 0.0 && p.x() <= width_ - 1.0 && p.y() >= 0.0 && p.y() <= height_ - 1.0;
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_size(int w, int h) const { return width_ == w && height_ == h; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using MaskRaster = Raster<uint8_t>;    // 0 = outside, 255 = inside
using LabelRaster = Raster<uint8_t>;   // direction labels 0..5
using FloatRaster = Raster<float>;

struct Rgb {
  float r = 0.f, g = 0.f, b = 0.f;
};
using ColorRaster = Raster<Rgb>;

// Bilinear sample of a float raster at a fractional pixel position (clamped).
inline double bilinear(const FloatRaster& r, double x, double y) {
  x = std::clamp(x, 0.0, r.width() - 1.0);
  y = std::clamp(y, 0.0, r.height() - 1.0);
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  int x1 = std::min(x0 + 1, r.width() - 1);
  int y1 = std::min(y0 + 1, r.height() - 1);
  double fx = x - x0, fy = y - y0;
  double v00 = r.at(x0, y0), v10 = r.at(x1, y0);
  double v01 = r.at(x0, y1), v11 = r.at(x1, y1);
  return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 + (1 - fx) * fy * v01 + fx * fy * v11;
}

inline int nearest_px(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace hairrec
