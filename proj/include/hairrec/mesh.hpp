#pragma once

#include "hairrec/core.hpp"

#include <array>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hairrec {

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  void expand(const Aabb& b) {
    min = min.cwiseMin(b.min);
    max = max.cwiseMax(b.max);
  }
  bool valid() const { return (min.array() <= max.array()).all(); }
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return valid() ? extent().norm() : 0.0; }
};

// Indexed triangle mesh with named per-vertex flag channels (0/1).
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::map<std::string, std::vector<uint8_t>> vertex_flags;  // each sized like vertices

  Aabb bounds() const {
    Aabb b;
    for (const auto& v : vertices) b.expand(v);
    return b;
  }

  double surface_area() const {
    double a = 0.0;
    for (const auto& f : faces) {
      const Vec3 e1 = vertices[f[1]] - vertices[f[0]];
      const Vec3 e2 = vertices[f[2]] - vertices[f[0]];
      a += 0.5 * e1.cross(e2).norm();
    }
    return a;
  }

  bool has_flag(const std::string& name) const { return vertex_flags.count(name) > 0; }
};

void validate_mesh(const TriangleMesh& m, const std::string& context = {});

// One-ring vertex adjacency from faces (symmetric, no duplicates, sorted).
std::vector<std::vector<int>> vertex_adjacency(const TriangleMesh& m);

// Area-weighted per-vertex normals, normalized (zero for isolated vertices).
std::vector<Vec3> vertex_normals(const TriangleMesh& m);

// Uniform-Laplacian smoothing: n_iter sweeps of v += step * (ring_mean - v).
// Vertices with empty rings stay fixed.
void laplacian_smooth(TriangleMesh& m, int n_iter, double step);

// Removes the flagged vertices and all faces touching them, reindexing the
// rest; flag channels are carried along.
TriangleMesh remove_vertices(const TriangleMesh& m, const std::vector<uint8_t>& remove);

// Connected components over vertex adjacency; returns per-vertex component id
// and the component count. Isolated vertices get their own component.
int connected_components(const TriangleMesh& m, std::vector<int>& comp);

// Watertight ray-triangle test. Returns t >= 0 along dir (not normalized
// required) or nothing.
std::optional<double> ray_triangle(const Vec3& orig, const Vec3& dir, const Vec3& a,
                                   const Vec3& b, const Vec3& c);

// Uniform grid over a mesh's triangles for segment queries.
class TriGrid {
 public:
  TriGrid() = default;
  explicit TriGrid(const TriangleMesh& mesh, int resolution = 32);

  // True if segment [p, q] intersects any triangle.
  bool segment_hits(const Vec3& p, const Vec3& q) const;

  // Parity point-in-mesh test (mesh must be closed). Casts a fixed-direction
  // ray and counts crossings; falls back to a second direction on grazing hits.
  bool contains(const Vec3& p) const;

  // Parametric ray hits in [0, 1] along q - p, sorted ascending.
  std::vector<double> segment_hit_params(const Vec3& p, const Vec3& q) const;

  // Earliest hit with t in [tmin, tmax] along orig + t * dir (dir unit-length
  // recommended); grid cells are walked front to back with early exit.
  std::optional<double> raycast(const Vec3& orig, const Vec3& dir, double tmin,
                                double tmax) const;

  bool empty() const { return tris_.empty(); }

 private:
  struct Tri {
    Vec3 a, b, c;
  };
  std::vector<Tri> tris_;
  std::vector<std::vector<int>> cells_;
  Vec3 origin_ = Vec3::Zero();
  double cell_ = 1.0;
  int nx_ = 0, ny_ = 0, nz_ = 0;

  int cell_index(int ix, int iy, int iz) const { return (iz * ny_ + iy) * nx_ + ix; }
  void cells_overlapping(const Vec3& lo, const Vec3& hi, std::vector<int>& out) const;
  bool count_crossings(const Vec3& p, const Vec3& dir, double max_t, double surface_eps,
                       bool& on_surface, int& crossings) const;
};

}  // namespace hairrec
