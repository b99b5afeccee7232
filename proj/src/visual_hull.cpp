#include "hairrec/visual_hull.hpp"

#include <algorithm>
#include <cmath>

namespace hairrec {

FrameRefs frame_refs(const std::vector<CameraFrame>& frames) {
  FrameRefs refs;
  refs.reserve(frames.size());
  for (const auto& f : frames) refs.push_back(&f);
  return refs;
}

namespace {

// Position of angle within [a, b] measured modulo 2 pi from a.
double forward_arc(double a, double angle) {
  double d = std::fmod(angle - a, 2.0 * kPi);
  if (d < 0.0) d += 2.0 * kPi;
  return d;
}

}  // namespace

bool ConfidenceRegion::contains(double angle) const {
  return forward_arc(r1, angle) <= (r2 - r1) || forward_arc(r3, angle) <= (r4 - r3);
}

double ConfidenceRegion::distance(double angle) const {
  if (contains(angle)) return 0.0;
  double d = angle_distance(angle, r1);
  d = std::min(d, angle_distance(angle, r2));
  d = std::min(d, angle_distance(angle, r3));
  d = std::min(d, angle_distance(angle, r4));
  return d;
}

double ConfidenceRegion::confidence(double angle, double sigma) const {
  const double d = distance(angle);
  if (d == 0.0) return 1.0;
  return std::exp(-(d * d) / (2.0 * sigma * sigma));
}

bool grid_segment_blocked(const VoxelGrid& grid, const Vec3& from, const Vec3& to,
                          double skip_dist) {
  const Vec3 delta = to - from;
  const double len = delta.norm();
  if (len == 0.0) return false;
  const Vec3 u = delta / len;

  // Clip to the grid box.
  const Vec3 lo = grid.origin;
  const Vec3 hi = grid.origin + grid.voxel * Vec3(grid.nx, grid.ny, grid.nz);
  double t0 = 0.0, t1 = len;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(u[a]) < 1e-15) {
      if (from[a] < lo[a] || from[a] > hi[a]) return false;
      continue;
    }
    double ta = (lo[a] - from[a]) / u[a];
    double tb = (hi[a] - from[a]) / u[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return false;

  int i, j, k;
  grid.locate(from + u * (t0 + 1e-12), i, j, k);
  i = std::clamp(i, 0, grid.nx - 1);
  j = std::clamp(j, 0, grid.ny - 1);
  k = std::clamp(k, 0, grid.nz - 1);

  const int step[3] = {u.x() > 0 ? 1 : -1, u.y() > 0 ? 1 : -1, u.z() > 0 ? 1 : -1};
  double t_max[3], t_delta[3];
  const int cell[3] = {i, j, k};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(u[a]) < 1e-15) {
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    } else {
      const double next =
          grid.origin[a] + grid.voxel * (cell[a] + (step[a] > 0 ? 1 : 0));
      t_max[a] = (next - from[a]) / u[a];
      t_delta[a] = grid.voxel / std::abs(u[a]);
    }
  }

  double entry = t0;
  while (entry <= t1) {
    if (grid.in_range(i, j, k) && grid.occ[grid.index(i, j, k)] && entry > skip_dist)
      return true;
    // Step into the neighboring cell across the nearest boundary.
    const int a = (t_max[0] <= t_max[1] && t_max[0] <= t_max[2]) ? 0
                  : (t_max[1] <= t_max[2])                       ? 1
                                                                 : 2;
    entry = t_max[a];
    t_max[a] += t_delta[a];
    if (a == 0)
      i += step[0];
    else if (a == 1)
      j += step[1];
    else
      k += step[2];
    if (i < 0 || i >= grid.nx || j < 0 || j >= grid.ny || k < 0 || k >= grid.nz) break;
  }
  return false;
}

std::vector<int> reject_blurred_frames(const std::vector<CameraFrame>& frames,
                                       const SceneConfig& cfg) {
  if (frames.empty()) throw Error(ErrorKind::Argument, "reject_blurred_frames: no frames");
  std::vector<size_t> areas(frames.size(), 0);
  double mean = 0.0;
  for (size_t i = 0; i < frames.size(); ++i) {
    const auto& p = frames[i].hair_prob;
    size_t n = 0;
    for (int px = 0; px < p.width() * p.height(); ++px)
      n += p.data()[px] > cfg.hair_prob_threshold;
    areas[i] = n;
    mean += static_cast<double>(n);
  }
  mean /= static_cast<double>(frames.size());

  std::vector<int> kept;
  for (size_t i = 0; i < frames.size(); ++i) {
    if (mean > 0.0 && static_cast<double>(areas[i]) >= cfg.blur_area_factor * mean)
      kept.push_back(frames[i].frame_id);
  }
  if (kept.empty())
    throw Error(ErrorKind::EmptyResult, "reject_blurred_frames: every frame rejected");
  return kept;
}

VoxelGrid hull_grid_for(const TriangleMesh& head, const SceneConfig& cfg) {
  const Aabb box = head.bounds();
  if (!box.valid()) throw Error(ErrorKind::DegenerateGeometry, "hull grid: empty head mesh");
  const double edge = cfg.hull_bounds_scale * box.extent().maxCoeff();
  const Vec3 origin = box.center() - Vec3::Constant(edge / 2.0);
  const int n = cfg.hull_resolution;
  return VoxelGrid(origin, edge / n, n, n, n);
}

VisualHull carve(const FrameRefs& frames, VoxelGrid grid) {
  if (frames.size() < 1) throw Error(ErrorKind::Argument, "carve: no frames");
  for (int k = 0; k < grid.nz; ++k) {
    for (int j = 0; j < grid.ny; ++j) {
      for (int i = 0; i < grid.nx; ++i) {
        const Vec3 c = grid.center(i, j, k);
        bool occupied = true;
        for (const CameraFrame* f : frames) {
          const auto px = f->camera.project(c);
          if (!px) continue;  // behind the camera: not seen by this frame
          const int x = nearest_px(px->x()), y = nearest_px(px->y());
          if (!f->mask.contains(x, y)) continue;  // outside the image: unseen
          if (f->mask.at(x, y) == 0) {
            occupied = false;
            break;
          }
        }
        grid.occ[grid.index(i, j, k)] = occupied ? 1 : 0;
      }
    }
  }
  if (grid.count_occupied() == 0)
    throw Error(ErrorKind::EmptyResult, "carve: silhouettes left no occupied voxel");
  VisualHull hull;
  hull.surface = extract_surface(grid);
  hull.grid = std::move(grid);
  return hull;
}

void label_hull_hair(VisualHull& hull, const FrameRefs& frames, const SceneConfig& cfg) {
  if (hull.surface.vertices.empty())
    throw Error(ErrorKind::Argument, "label_hull_hair: empty hull surface");
  auto& flags = hull.surface.vertex_flags["hair"];
  flags.assign(hull.surface.vertices.size(), 0);
  const double skip = hull.grid.voxel * std::sqrt(3.0);
  hull.unseen_vertices = 0;

  for (size_t v = 0; v < hull.surface.vertices.size(); ++v) {
    const Vec3& p = hull.surface.vertices[v];
    double sum = 0.0;
    int seen = 0;
    for (const CameraFrame* f : frames) {
      const auto px = f->camera.project(p);
      if (!px || !f->hair_prob.contains(*px)) continue;
      if (grid_segment_blocked(hull.grid, p, f->camera.center(), skip)) continue;
      sum += bilinear(f->hair_prob, px->x(), px->y());
      ++seen;
    }
    if (seen == 0) {
      ++hull.unseen_vertices;
      continue;
    }
    flags[v] = (sum / seen) > cfg.hair_prob_threshold ? 1 : 0;
  }
}

TriangleMesh hair_submesh(const VisualHull& hull) {
  const auto it = hull.surface.vertex_flags.find("hair");
  if (it == hull.surface.vertex_flags.end())
    throw Error(ErrorKind::Argument, "hair_submesh: hull is not labeled");
  std::vector<uint8_t> remove(hull.surface.vertices.size());
  for (size_t i = 0; i < remove.size(); ++i) remove[i] = it->second[i] ? 0 : 1;
  return remove_vertices(hull.surface, remove);
}

ConfidenceRegion confidence_region(const FrameRefs& frames, VisualHull* hull) {
  if (frames.empty()) throw Error(ErrorKind::Argument, "confidence_region: no frames");
  double lo = frames[0]->azimuth, hi = frames[0]->azimuth;
  for (const CameraFrame* f : frames) {
    lo = std::min(lo, f->azimuth);
    hi = std::max(hi, f->azimuth);
  }
  ConfidenceRegion region;
  region.r1 = lo - kPi / 2.0;
  region.r2 = hi - kPi / 2.0;
  region.r3 = lo + kPi / 2.0;
  region.r4 = hi + kPi / 2.0;

  if (hull) {
    auto& flags = hull->surface.vertex_flags["high_confidence"];
    flags.assign(hull->surface.vertices.size(), 0);
    for (size_t v = 0; v < hull->surface.vertices.size(); ++v) {
      const Vec3& p = hull->surface.vertices[v];
      const double az = std::atan2(p.x(), p.z());
      flags[v] = region.contains(az) ? 1 : 0;
    }
  }
  return region;
}

}  // namespace hairrec
