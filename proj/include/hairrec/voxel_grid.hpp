#pragma once

#include "hairrec/core.hpp"
#include "hairrec/mesh.hpp"

#include <vector>

namespace hairrec {

// Axis-aligned boolean occupancy grid. Voxel (i,j,k) is the cube whose center
// is origin + voxel * (i+0.5, j+0.5, k+0.5); indices run x-fastest.
struct VoxelGrid {
  Vec3 origin = Vec3::Zero();
  double voxel = 1.0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<uint8_t> occ;

  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin_, double voxel_, int nx_, int ny_, int nz_)
      : origin(origin_), voxel(voxel_), nx(nx_), ny(ny_), nz(nz_) {
    if (nx <= 0 || ny <= 0 || nz <= 0 || voxel <= 0.0)
      throw Error(ErrorKind::Argument, "VoxelGrid: non-positive dimensions");
    occ.assign(static_cast<size_t>(nx) * ny * nz, 0);
  }

  size_t index(int i, int j, int k) const {
    return (static_cast<size_t>(k) * ny + j) * nx + i;
  }
  bool in_range(int i, int j, int k) const {
    return i >= 0 && i < nx && j >= 0 && j < ny && k >= 0 && k < nz;
  }
  // Out-of-range reads are empty, which keeps surface extraction watertight.
  bool at(int i, int j, int k) const { return in_range(i, j, k) && occ[index(i, j, k)] != 0; }
  void set(int i, int j, int k, bool v) { occ[index(i, j, k)] = v ? 1 : 0; }

  Vec3 center(int i, int j, int k) const {
    return origin + voxel * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  // Voxel containing a world point (unclamped; may be out of range).
  void locate(const Vec3& p, int& i, int& j, int& k) const {
    const Vec3 rel = (p - origin) / voxel;
    i = static_cast<int>(std::floor(rel.x()));
    j = static_cast<int>(std::floor(rel.y()));
    k = static_cast<int>(std::floor(rel.z()));
  }

  size_t count_occupied() const {
    size_t n = 0;
    for (uint8_t v : occ) n += v != 0;
    return n;
  }
};

// Marching-cubes isosurface of the binary occupancy at iso 0.5: vertices sit
// at midpoints of lattice edges between occupied and empty samples (samples at
// voxel centers, one virtual empty layer around the grid). Vertices are welded
// by lattice-edge key, so the result is watertight and deterministic.
TriangleMesh extract_surface(const VoxelGrid& grid);

}  // namespace hairrec
