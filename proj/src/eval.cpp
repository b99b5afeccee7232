#include "hairrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>

namespace hairrec {

StrandSet strand_colors(const StrandSet& strands, const std::vector<CameraFrame>& frames,
                        double depth_tolerance) {
  StrandSet out = strands;
  Vec3 visible_sum = Vec3::Zero();
  long visible_count = 0;
  std::vector<std::vector<char>> seen(out.strands.size());

  for (size_t si = 0; si < out.strands.size(); ++si) {
    Strand& s = out.strands[si];
    s.colors.assign(s.vertices.size(), Vec3::Zero());
    seen[si].assign(s.vertices.size(), 0);
    for (size_t vi = 0; vi < s.vertices.size(); ++vi) {
      Vec3 sum = Vec3::Zero();
      int hits = 0;
      for (const CameraFrame& f : frames) {
        if (!f.color) continue;
        double z = 0.0;
        const auto px = f.camera.project(s.vertices[vi], &z);
        if (!px) continue;
        const int x = nearest_px(px->x()), y = nearest_px(px->y());
        if (!f.mask.contains(x, y)) continue;
        const float d = f.depth.at(x, y);
        if (d <= 0.0f || std::abs(z - d) > depth_tolerance) continue;
        const Rgb c = f.color->at(x, y);
        sum += Vec3(c.r, c.g, c.b);
        ++hits;
      }
      if (hits > 0) {
        s.colors[vi] = sum / hits;
        seen[si][vi] = 1;
        visible_sum += s.colors[vi];
        ++visible_count;
      }
    }
  }

  const Vec3 fallback = visible_count > 0 ? Vec3(visible_sum / visible_count)
                                          : Vec3(0.5, 0.5, 0.5);
  if (visible_count == 0)
    std::cerr << "warning: no strand vertex visible in any frame; using mid-gray\n";
  for (size_t si = 0; si < out.strands.size(); ++si)
    for (size_t vi = 0; vi < out.strands[si].vertices.size(); ++vi)
      if (!seen[si][vi]) out.strands[si].colors[vi] = fallback;
  return out;
}

MaskRaster rasterize_strand_mask(const StrandSet& strands, const Camera& camera, int width,
                                 int height, double width_px) {
  MaskRaster mask(width, height, 0);
  const double radius = width_px / 2.0;
  auto stamp = [&](const Vec2& q) {
    const int x0 = std::max(0, static_cast<int>(std::floor(q.x() - radius)));
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(q.x() + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(q.y() - radius)));
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(q.y() + radius)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - q.x(), dy = y - q.y();
        if (dx * dx + dy * dy <= radius * radius) mask.at(x, y) = 255;
      }
  };
  for (const Strand& s : strands.strands) {
    std::vector<std::optional<Vec2>> px(s.vertices.size());
    for (size_t i = 0; i < s.vertices.size(); ++i) px[i] = camera.project(s.vertices[i]);
    for (size_t i = 0; i + 1 < s.vertices.size(); ++i) {
      if (!px[i] || !px[i + 1]) continue;
      const Vec2 q0 = *px[i], q1 = *px[i + 1];
      const int steps = std::max(1, static_cast<int>(std::ceil((q1 - q0).norm() / 0.5)));
      for (int t = 0; t <= steps; ++t) stamp(q0 + (static_cast<double>(t) / steps) * (q1 - q0));
    }
  }
  return mask;
}

double evaluate_iou(const StrandSet& strands, const CameraFrame& frame,
                    const MaskRaster& gt_mask, double width_px) {
  if (!gt_mask.same_size(frame.width(), frame.height()))
    throw Error(ErrorKind::Argument, "evaluate_iou: mask size != frame size");
  const MaskRaster proj =
      rasterize_strand_mask(strands, frame.camera, frame.width(), frame.height(), width_px);
  long inter = 0, uni = 0;
  for (size_t i = 0; i < proj.data().size(); ++i) {
    const bool a = proj.data()[i] != 0, b = gt_mask.data()[i] != 0;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

StrandSet recolor(const StrandSet& strands, double factor) {
  if (factor <= 0.0) throw Error(ErrorKind::Argument, "recolor: factor must be positive");
  StrandSet out = strands;
  for (Strand& s : out.strands)
    for (Vec3& c : s.colors)
      c = (factor * c).cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

StrandSet morph(const StrandSet& a, const StrandSet& b, double t, const TriangleMesh& head) {
  if (t < 0.0 || t > 1.0) throw Error(ErrorKind::Argument, "morph: t must lie in [0, 1]");
  if (a.strands.size() != b.strands.size())
    throw Error(ErrorKind::Correspondence,
                "morph: strand counts differ (" + std::to_string(a.strands.size()) + " vs " +
                    std::to_string(b.strands.size()) + ")");

  // Face region: the closed submesh of faces whose vertices all carry `face`.
  TriGrid face_grid;
  if (head.has_flag("face")) {
    const std::vector<uint8_t>& flag = head.vertex_flags.at("face");
    TriangleMesh sub;
    sub.vertices = head.vertices;
    for (const auto& f : head.faces)
      if (flag[f[0]] && flag[f[1]] && flag[f[2]]) sub.faces.push_back(f);
    if (!sub.faces.empty()) face_grid = TriGrid(sub);
  }

  StrandSet out;
  out.source_tag = "morph";
  for (size_t si = 0; si < a.strands.size(); ++si) {
    const Strand& sa = a.strands[si];
    const Strand& sb = b.strands[si];
    if (sa.vertices.size() != sb.vertices.size())
      throw Error(ErrorKind::Correspondence,
                  "morph: strand " + std::to_string(si) + " vertex counts differ");
    Strand m;
    const bool colors = sa.has_colors() && sb.has_colors();
    for (size_t vi = 0; vi < sa.vertices.size(); ++vi) {
      const Vec3 p = (1.0 - t) * sa.vertices[vi] + t * sb.vertices[vi];
      if (!face_grid.empty() && face_grid.contains(p)) break;
      m.vertices.push_back(p);
      if (colors) m.colors.push_back((1.0 - t) * sa.colors[vi] + t * sb.colors[vi]);
    }
    if (m.vertices.size() < 2) continue;
    m.recompute_tangents();
    out.strands.push_back(std::move(m));
  }
  return out;
}

}  // namespace hairrec
