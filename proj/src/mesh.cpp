#include "hairrec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>

namespace hairrec {

void validate_mesh(const TriangleMesh& m, const std::string& context) {
  const std::string where = context.empty() ? std::string("mesh") : context;
  const int n = static_cast<int>(m.vertices.size());
  for (const auto& f : m.faces) {
    for (int k = 0; k < 3; ++k) {
      if (f[k] < 0 || f[k] >= n)
        throw Error(ErrorKind::Validation, where + ": face index out of range");
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw Error(ErrorKind::Validation, where + ": degenerate face");
  }
  for (const auto& [name, flags] : m.vertex_flags) {
    if (flags.size() != m.vertices.size())
      throw Error(ErrorKind::Validation, where + ": flag channel '" + name + "' size mismatch");
  }
}

std::vector<std::vector<int>> vertex_adjacency(const TriangleMesh& m) {
  std::vector<std::set<int>> adj(m.vertices.size());
  for (const auto& f : m.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      adj[a].insert(b);
      adj[b].insert(a);
    }
  }
  std::vector<std::vector<int>> out(m.vertices.size());
  for (size_t i = 0; i < adj.size(); ++i) out[i].assign(adj[i].begin(), adj[i].end());
  return out;
}

std::vector<Vec3> vertex_normals(const TriangleMesh& m) {
  std::vector<Vec3> normals(m.vertices.size(), Vec3::Zero());
  for (const auto& f : m.faces) {
    const Vec3 e1 = m.vertices[f[1]] - m.vertices[f[0]];
    const Vec3 e2 = m.vertices[f[2]] - m.vertices[f[0]];
    const Vec3 n = e1.cross(e2);  // magnitude = 2 * area
    for (int k = 0; k < 3; ++k) normals[f[k]] += n;
  }
  for (auto& n : normals) {
    const double len = n.norm();
    if (len > 0.0) n /= len;
  }
  return normals;
}

void laplacian_smooth(TriangleMesh& m, int n_iter, double step) {
  const auto adj = vertex_adjacency(m);
  std::vector<Vec3> next(m.vertices.size());
  for (int it = 0; it < n_iter; ++it) {
    for (size_t i = 0; i < m.vertices.size(); ++i) {
      if (adj[i].empty()) {
        next[i] = m.vertices[i];
        continue;
      }
      Vec3 mean = Vec3::Zero();
      for (int j : adj[i]) mean += m.vertices[j];
      mean /= static_cast<double>(adj[i].size());
      next[i] = m.vertices[i] + step * (mean - m.vertices[i]);
    }
    m.vertices.swap(next);
  }
}

TriangleMesh remove_vertices(const TriangleMesh& m, const std::vector<uint8_t>& remove) {
  if (remove.size() != m.vertices.size())
    throw Error(ErrorKind::Argument, "remove_vertices: flag size mismatch");
  TriangleMesh out;
  std::vector<int> remap(m.vertices.size(), -1);
  for (size_t i = 0; i < m.vertices.size(); ++i) {
    if (!remove[i]) {
      remap[i] = static_cast<int>(out.vertices.size());
      out.vertices.push_back(m.vertices[i]);
    }
  }
  for (const auto& [name, flags] : m.vertex_flags) {
    auto& dst = out.vertex_flags[name];
    dst.reserve(out.vertices.size());
    for (size_t i = 0; i < m.vertices.size(); ++i)
      if (!remove[i]) dst.push_back(flags[i]);
  }
  for (const auto& f : m.faces) {
    if (remap[f[0]] >= 0 && remap[f[1]] >= 0 && remap[f[2]] >= 0)
      out.faces.push_back({remap[f[0]], remap[f[1]], remap[f[2]]});
  }
  return out;
}

int connected_components(const TriangleMesh& m, std::vector<int>& comp) {
  const auto adj = vertex_adjacency(m);
  comp.assign(m.vertices.size(), -1);
  int n_comp = 0;
  for (size_t seed = 0; seed < m.vertices.size(); ++seed) {
    if (comp[seed] >= 0) continue;
    const int id = n_comp++;
    std::queue<int> q;
    q.push(static_cast<int>(seed));
    comp[seed] = id;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int w : adj[v]) {
        if (comp[w] < 0) {
          comp[w] = id;
          q.push(w);
        }
      }
    }
  }
  return n_comp;
}

std::optional<double> ray_triangle(const Vec3& orig, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c) {
  constexpr double eps = 1e-12;
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < eps) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = orig - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = e2.dot(qvec) * inv_det;
  if (t < 0.0) return std::nullopt;
  return t;
}

TriGrid::TriGrid(const TriangleMesh& mesh, int resolution) {
  if (mesh.faces.empty()) return;
  Aabb box = mesh.bounds();
  const Vec3 pad = Vec3::Constant(std::max(1e-9, box.diagonal() * 1e-6));
  box.min -= pad;
  box.max += pad;
  const Vec3 ext = box.extent();
  const double longest = ext.maxCoeff();
  cell_ = longest / std::max(1, resolution);
  origin_ = box.min;
  nx_ = std::max(1, static_cast<int>(std::ceil(ext.x() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(ext.y() / cell_)));
  nz_ = std::max(1, static_cast<int>(std::ceil(ext.z() / cell_)));
  cells_.resize(static_cast<size_t>(nx_) * ny_ * nz_);

  tris_.reserve(mesh.faces.size());
  std::vector<int> touched;
  for (const auto& f : mesh.faces) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({mesh.vertices[f[0]], mesh.vertices[f[1]], mesh.vertices[f[2]]});
    Aabb tb;
    tb.expand(tris_.back().a);
    tb.expand(tris_.back().b);
    tb.expand(tris_.back().c);
    cells_overlapping(tb.min, tb.max, touched);
    for (int c : touched) cells_[c].push_back(id);
  }
}

void TriGrid::cells_overlapping(const Vec3& lo, const Vec3& hi, std::vector<int>& out) const {
  out.clear();
  auto clamp_idx = [](int v, int n) { return std::min(std::max(v, 0), n - 1); };
  const int x0 = clamp_idx(static_cast<int>(std::floor((lo.x() - origin_.x()) / cell_)), nx_);
  const int y0 = clamp_idx(static_cast<int>(std::floor((lo.y() - origin_.y()) / cell_)), ny_);
  const int z0 = clamp_idx(static_cast<int>(std::floor((lo.z() - origin_.z()) / cell_)), nz_);
  const int x1 = clamp_idx(static_cast<int>(std::floor((hi.x() - origin_.x()) / cell_)), nx_);
  const int y1 = clamp_idx(static_cast<int>(std::floor((hi.y() - origin_.y()) / cell_)), ny_);
  const int z1 = clamp_idx(static_cast<int>(std::floor((hi.z() - origin_.z()) / cell_)), nz_);
  for (int z = z0; z <= z1; ++z)
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) out.push_back(cell_index(x, y, z));
}

std::vector<double> TriGrid::segment_hit_params(const Vec3& p, const Vec3& q) const {
  std::vector<double> hits;
  if (tris_.empty()) return hits;
  Aabb seg;
  seg.expand(p);
  seg.expand(q);
  std::vector<int> touched;
  cells_overlapping(seg.min, seg.max, touched);
  std::set<int> seen;
  const Vec3 dir = q - p;
  for (int c : touched) {
    for (int id : cells_[c]) {
      if (!seen.insert(id).second) continue;
      const auto& t = tris_[id];
      if (auto hit = ray_triangle(p, dir, t.a, t.b, t.c); hit && *hit <= 1.0)
        hits.push_back(*hit);
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

bool TriGrid::segment_hits(const Vec3& p, const Vec3& q) const {
  return !segment_hit_params(p, q).empty();
}

std::optional<double> TriGrid::raycast(const Vec3& orig, const Vec3& dir, double tmin,
                                       double tmax) const {
  if (tris_.empty()) return std::nullopt;
  const Vec3 lo = origin_;
  const Vec3 hi = origin_ + cell_ * Vec3(nx_, ny_, nz_);
  double t0 = tmin, t1 = tmax;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      if (orig[a] < lo[a] || orig[a] > hi[a]) return std::nullopt;
      continue;
    }
    double ta = (lo[a] - orig[a]) / dir[a];
    double tb = (hi[a] - orig[a]) / dir[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (t0 > t1) return std::nullopt;

  auto cell_of = [&](double v, double o, int n) {
    return std::clamp(static_cast<int>(std::floor((v - o) / cell_)), 0, n - 1);
  };
  const Vec3 start = orig + dir * (t0 + 1e-12);
  int ci = cell_of(start.x(), origin_.x(), nx_);
  int cj = cell_of(start.y(), origin_.y(), ny_);
  int ck = cell_of(start.z(), origin_.z(), nz_);

  const int step[3] = {dir.x() > 0 ? 1 : -1, dir.y() > 0 ? 1 : -1, dir.z() > 0 ? 1 : -1};
  double t_next[3], t_delta[3];
  const int cells[3] = {ci, cj, ck};
  const int dims[3] = {nx_, ny_, nz_};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(dir[a]) < 1e-15) {
      t_next[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    } else {
      const double boundary = origin_[a] + cell_ * (cells[a] + (step[a] > 0 ? 1 : 0));
      t_next[a] = (boundary - orig[a]) / dir[a];
      t_delta[a] = cell_ / std::abs(dir[a]);
    }
  }

  double best = std::numeric_limits<double>::infinity();
  std::set<int> seen;
  double cell_exit = std::min({t_next[0], t_next[1], t_next[2]});
  while (true) {
    for (int id : cells_[cell_index(ci, cj, ck)]) {
      if (!seen.insert(id).second) continue;
      const auto& t = tris_[id];
      if (auto hit = ray_triangle(orig, dir, t.a, t.b, t.c);
          hit && *hit >= tmin && *hit <= tmax && *hit < best)
        best = *hit;
    }
    // A hit inside the already-walked region is final.
    if (best <= cell_exit) break;
    const int a = (t_next[0] <= t_next[1] && t_next[0] <= t_next[2]) ? 0
                  : (t_next[1] <= t_next[2])                         ? 1
                                                                     : 2;
    if (t_next[a] > t1) break;
    t_next[a] += t_delta[a];
    if (a == 0)
      ci += step[0];
    else if (a == 1)
      cj += step[1];
    else
      ck += step[2];
    if (ci < 0 || ci >= nx_ || cj < 0 || cj >= ny_ || ck < 0 || ck >= nz_) break;
    cell_exit = std::min({t_next[0], t_next[1], t_next[2]});
  }
  if (best == std::numeric_limits<double>::infinity()) return std::nullopt;
  return best;
}

bool TriGrid::count_crossings(const Vec3& p, const Vec3& dir, double max_t,
                              double surface_eps, bool& on_surface, int& crossings) const {
  crossings = 0;
  std::set<int> seen;
  Aabb seg;
  seg.expand(p);
  seg.expand(p + dir * max_t);
  std::vector<int> touched;
  cells_overlapping(seg.min, seg.max, touched);
  std::vector<double> hits;
  for (int c : touched) {
    for (int id : cells_[c]) {
      if (!seen.insert(id).second) continue;
      const auto& t = tris_[id];
      const Vec3 e1 = t.b - t.a;
      const Vec3 e2 = t.c - t.a;
      const Vec3 pvec = dir.cross(e2);
      const double det = e1.dot(pvec);
      if (std::abs(det) < 1e-12) continue;
      const double inv_det = 1.0 / det;
      const Vec3 tvec = p - t.a;
      const double u = tvec.dot(pvec) * inv_det;
      // Reject grazing hits near edges: the caller retries another direction.
      constexpr double edge_eps = 1e-9;
      if (u < -edge_eps || u > 1.0 + edge_eps) continue;
      const Vec3 qvec = tvec.cross(e1);
      const double v = dir.dot(qvec) * inv_det;
      if (v < -edge_eps || u + v > 1.0 + edge_eps) continue;
      const double th = e2.dot(qvec) * inv_det;
      // The query point itself lies on this triangle (face, edge, or vertex):
      // it is on the surface, not strictly inside, for every ray direction.
      if (std::abs(th) <= surface_eps) {
        on_surface = true;
        return true;
      }
      if (u < edge_eps || v < edge_eps || u + v > 1.0 - edge_eps) return false;
      if (th > 0.0 && th <= max_t) hits.push_back(th);
    }
  }
  crossings = static_cast<int>(hits.size());
  return true;
}

bool TriGrid::contains(const Vec3& p) const {
  if (tris_.empty()) return false;
  const Vec3 far_extent(static_cast<double>(nx_), static_cast<double>(ny_),
                        static_cast<double>(nz_));
  const double reach = cell_ * far_extent.norm() * 2.0 + 1.0;
  const double surface_eps = 1e-9 * (cell_ * far_extent.norm() + 1.0);
  // Irrational-slope directions make axis-aligned edge grazing unlikely.
  const std::array<Vec3, 4> dirs = {Vec3(0.57735, 0.688191, 0.437016),
                                    Vec3(-0.313287, 0.815288, 0.487089),
                                    Vec3(0.925820, -0.132453, 0.354005),
                                    Vec3(-0.479, -0.558, 0.677)};
  for (const auto& d : dirs) {
    const Vec3 dn = d.normalized();
    int crossings = 0;
    bool on_surface = false;
    if (count_crossings(p, dn, reach, surface_eps, on_surface, crossings))
      return on_surface ? false : (crossings % 2) == 1;
  }
  throw Error(ErrorKind::DegenerateGeometry, "TriGrid::contains: all parity rays grazed edges");
}

}  // namespace hairrec
