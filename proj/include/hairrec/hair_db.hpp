#pragma once

#include "hairrec/core.hpp"
#include "hairrec/kdtree.hpp"
#include "hairrec/mesh.hpp"
#include "hairrec/scene.hpp"
#include "hairrec/strand.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hairrec {

struct Hairstyle {
  std::string id;
  StrandSet strands;  // directed, root first
};

// Smoothed outer-surface proxy built from a style's strand vertices.
struct RoughMesh {
  TriangleMesh mesh;
  double surface_area = 0.0;
  double x_extent = 0.0;
  double y_extent = 0.0;
  std::string owner;
};

// Decimated vertex index (position + tangent) used by the set distance.
struct StyleIndex {
  std::vector<Vec3> points;
  std::vector<Vec3> tangents;
  KdTree3 tree;
  double penalty = 0.0;  // charged per query vertex with no admissible match
};

struct DatabaseEntry {
  Hairstyle style;
  RoughMesh rough;
  StyleIndex index;
};

struct HairDatabase {
  std::vector<DatabaseEntry> entries;  // sorted by id

  const DatabaseEntry* find(const std::string& id) const {
    for (const auto& e : entries)
      if (e.style.id == id) return &e;
    return nullptr;
  }
};

// Voxelize strand vertices, extract + smooth the surface, then strip inner
// layers: a vertex is removed when the ray from the style's scalp-bbox center
// through it hits the mesh again beyond the vertex.
RoughMesh build_rough_mesh(const Hairstyle& style, const SceneConfig& cfg);

// Index over strand vertices decimated to >= `spacing` along each strand
// (original vertices and tangents, no interpolation). Penalty is the bounding
// box diagonal of the style's strand vertices.
StyleIndex build_style_index(const StrandSet& strands, double spacing);

// Entries whose x/y extents lie in (0.8, 1.2) x X_h's and whose area lies in
// (0.8, 1.5) x X_h's. Throws EmptyResult with a relaxation hint when empty.
std::vector<std::string> prune(const TriangleMesh& x_h, const HairDatabase& db);

// Sum over query vertices of the distance to the nearest index point with a
// positive tangent dot product; vertices with no admissible point add the
// index penalty. Fixed summation order (strand major, vertex minor).
double strand_set_distance(const StrandSet& q, const StyleIndex& index);
// Reference double loop over the same point set.
double strand_set_distance_brute(const StrandSet& q, const StyleIndex& index);

struct RankedStyle {
  std::string id;
  double distance = 0.0;
};

// Candidates sorted ascending by distance (ties by id), truncated to k.
std::vector<RankedStyle> retrieve(const StrandSet& q, const HairDatabase& db,
                                  const std::vector<std::string>& candidates, int k);

// Directory layout: one <id>.hstr per style, cached <id>_rough.obj, and
// meta.txt lines `id x_extent y_extent surface_area vertex_count`.
HairDatabase load_database(const std::filesystem::path& dir, const SceneConfig& cfg);
// (Re)builds rough meshes and meta.txt for every .hstr in the directory.
HairDatabase build_database(const std::filesystem::path& dir, const SceneConfig& cfg);

}  // namespace hairrec
