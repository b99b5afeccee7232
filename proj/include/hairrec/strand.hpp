#pragma once

#include "hairrec/core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hairrec {

// Directed 3D polyline, root first. Tangents are forward differences, the last
// vertex copies the previous one.
struct Strand {
  std::vector<Vec3> vertices;
  std::vector<Vec3> tangents;
  std::vector<Vec3> colors;  // empty, or one RGB in [0,1] per vertex

  bool has_colors() const { return !colors.empty(); }

  void recompute_tangents() {
    const size_t n = vertices.size();
    tangents.resize(n);
    for (size_t i = 0; i + 1 < n; ++i) tangents[i] = (vertices[i + 1] - vertices[i]).normalized();
    if (n >= 2) tangents[n - 1] = tangents[n - 2];
  }

  double length() const {
    double len = 0.0;
    for (size_t i = 0; i + 1 < vertices.size(); ++i) len += (vertices[i + 1] - vertices[i]).norm();
    return len;
  }

  void reverse() {
    std::reverse(vertices.begin(), vertices.end());
    if (!colors.empty()) std::reverse(colors.begin(), colors.end());
    recompute_tangents();
  }
};

struct StrandSet {
  std::vector<Strand> strands;
  std::string source_tag;

  size_t total_vertices() const {
    size_t n = 0;
    for (const auto& s : strands) n += s.vertices.size();
    return n;
  }
};

// Checks the Strand invariants: >= 2 vertices, unit tangents, consecutive
// vertices distinct. Throws Validation on failure.
void validate_strand(const Strand& s, const std::string& context = {});

// Arc-length-uniform resampling to exactly n vertices, endpoints preserved.
// Colors are interpolated when present. Throws on zero-length strands.
Strand resample_strand(const Strand& s, int n);

// Greedy arc-length decimation: keeps the first vertex, then every vertex at
// least `spacing` along the polyline from the last kept one. Original vertex
// positions and tangents are preserved (no interpolation).
Strand decimate_strand(const Strand& s, double spacing);

}  // namespace hairrec
