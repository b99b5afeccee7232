#include "doctest.h"

#include "hairrec/mesh.hpp"
#include "hairrec/synth.hpp"
#include "test_util.hpp"

#include <random>

using namespace hairrec;

namespace {

TriangleMesh tetrahedron() {
  TriangleMesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  m.faces = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  return m;
}

}  // namespace

TEST_CASE("validate_mesh rejects bad indices and degenerate faces") {
  TriangleMesh m = tetrahedron();
  CHECK_NOTHROW(validate_mesh(m));

  TriangleMesh oor = m;
  oor.faces.push_back({0, 1, 4});
  CHECK_THROWS_AS(validate_mesh(oor), Error);

  TriangleMesh degen = m;
  degen.faces.push_back({2, 2, 3});
  CHECK_THROWS_AS(validate_mesh(degen), Error);
}

TEST_CASE("vertex_adjacency is symmetric, sorted, and duplicate-free") {
  const TriangleMesh m = tetrahedron();
  const auto adj = vertex_adjacency(m);
  REQUIRE(adj.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(adj[i].size() == 3);  // complete graph on the tetrahedron
    CHECK(std::is_sorted(adj[i].begin(), adj[i].end()));
    for (int j : adj[i]) {
      CHECK(j != i);
      CHECK(std::count(adj[j].begin(), adj[j].end(), i) == 1);
    }
  }
}

TEST_CASE("vertex_normals of a sphere point radially outward") {
  const TriangleMesh sphere = make_icosphere(0.1, 3);
  const auto normals = vertex_normals(sphere);
  REQUIRE(normals.size() == sphere.vertices.size());
  for (size_t i = 0; i < normals.size(); ++i) {
    CHECK(normals[i].norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(normals[i].dot(sphere.vertices[i].normalized()) > 0.99);
  }
}

TEST_CASE("laplacian_smooth shrinks a sphere and zero iterations is a no-op") {
  TriangleMesh sphere = make_icosphere(0.1, 3);
  const double area0 = sphere.surface_area();

  TriangleMesh same = sphere;
  laplacian_smooth(same, 0, 0.5);
  for (size_t i = 0; i < sphere.vertices.size(); ++i)
    CHECK((same.vertices[i] - sphere.vertices[i]).norm() == 0.0);

  laplacian_smooth(sphere, 10, 0.5);
  CHECK(sphere.surface_area() < area0);
  // Still sphere-like: vertices remain near a common radius.
  double rmin = 1e9, rmax = 0.0;
  for (const auto& v : sphere.vertices) {
    rmin = std::min(rmin, v.norm());
    rmax = std::max(rmax, v.norm());
  }
  CHECK(rmax - rmin < 0.01);
}

TEST_CASE("remove_vertices reindexes faces and carries flag channels") {
  TriangleMesh m = tetrahedron();
  m.vertex_flags["keep_me"] = {1, 0, 1, 0};
  std::vector<uint8_t> remove = {0, 1, 0, 0};  // drop vertex 1

  const TriangleMesh out = remove_vertices(m, remove);
  REQUIRE(out.vertices.size() == 3);
  REQUIRE(out.faces.size() == 1);  // only {0,2,3} avoided vertex 1
  CHECK(out.vertex_flags.at("keep_me") == std::vector<uint8_t>{1, 1, 0});
  for (const auto& f : out.faces)
    for (int idx : f) CHECK(idx < 3);
  CHECK_NOTHROW(validate_mesh(out));
}

TEST_CASE("connected_components separates disjoint shells") {
  TriangleMesh two = make_icosphere(0.1, 2);
  const size_t n1 = two.vertices.size();
  const TriangleMesh other = make_icosphere(0.05, 2);
  for (const auto& v : other.vertices) two.vertices.push_back(v + Vec3(1.0, 0.0, 0.0));
  for (const auto& f : other.faces)
    two.faces.push_back({f[0] + static_cast<int>(n1), f[1] + static_cast<int>(n1),
                         f[2] + static_cast<int>(n1)});

  std::vector<int> comp;
  const int n_comp = connected_components(two, comp);
  CHECK(n_comp == 2);
  CHECK(comp[0] != comp[n1]);

  // An isolated vertex becomes its own component.
  two.vertices.push_back(Vec3(5, 5, 5));
  const int n3 = connected_components(two, comp);
  CHECK(n3 == 3);
}

TEST_CASE("ray_triangle reports the parametric hit distance") {
  const Vec3 a(0, 0, 1), b(1, 0, 1), c(0, 1, 1);

  const auto hit = ray_triangle(Vec3(0.2, 0.2, 0), Vec3(0, 0, 1), a, b, c);
  REQUIRE(hit.has_value());
  CHECK(*hit == doctest::Approx(1.0));

  // Non-normalized direction halves the parameter.
  const auto hit2 = ray_triangle(Vec3(0.2, 0.2, 0), Vec3(0, 0, 2), a, b, c);
  REQUIRE(hit2.has_value());
  CHECK(*hit2 == doctest::Approx(0.5));

  CHECK_FALSE(ray_triangle(Vec3(0.9, 0.9, 0), Vec3(0, 0, 1), a, b, c).has_value());
  CHECK_FALSE(ray_triangle(Vec3(0.2, 0.2, 0), Vec3(1, 0, 0), a, b, c).has_value());
  CHECK_FALSE(ray_triangle(Vec3(0.2, 0.2, 2), Vec3(0, 0, 1), a, b, c).has_value());
}

TEST_CASE("TriGrid segment queries against a sphere") {
  const TriangleMesh sphere = make_icosphere(0.1, 3);
  const TriGrid grid(sphere);

  CHECK(grid.segment_hits(Vec3(-0.2, 0.001, 0.001), Vec3(0.2, 0.001, 0.001)));
  CHECK(grid.segment_hits(Vec3(0, 0.001, 0.001), Vec3(0.2, 0.001, 0.001)));
  CHECK_FALSE(grid.segment_hits(Vec3(0.15, 0, 0), Vec3(0.3, 0, 0)));
  CHECK_FALSE(grid.segment_hits(Vec3(0.01, 0, 0), Vec3(-0.01, 0, 0)));

  const auto params = grid.segment_hit_params(Vec3(-0.2, 0.001, 0.001), Vec3(0.2, 0.001, 0.001));
  REQUIRE(params.size() >= 2);
  CHECK(std::is_sorted(params.begin(), params.end()));
  // Entry and exit straddle the sphere: near t = 0.25 and t = 0.75.
  CHECK(params.front() == doctest::Approx(0.25).epsilon(0.05));
  CHECK(params.back() == doctest::Approx(0.75).epsilon(0.05));

  const auto t = grid.raycast(Vec3(-0.2, 0.001, 0.001), Vec3(1, 0, 0), 0.0, 1.0);
  REQUIRE(t.has_value());
  CHECK(*t == doctest::Approx(0.1).epsilon(0.02));
  CHECK_FALSE(grid.raycast(Vec3(-0.2, 0.001, 0.001), Vec3(-1, 0, 0), 0.0, 1.0).has_value());
}

TEST_CASE("TriGrid::contains classifies inside, outside, and surface points") {
  const TriangleMesh sphere = make_icosphere(0.1, 3);
  const TriGrid grid(sphere);

  CHECK(grid.contains(Vec3(0, 0, 0)));
  CHECK(grid.contains(Vec3(0.05, 0.02, -0.03)));
  CHECK_FALSE(grid.contains(Vec3(0.2, 0, 0)));
  CHECK_FALSE(grid.contains(Vec3(0.1001, 0, 0)));

  // Points exactly on the surface (mesh vertices) are not strictly inside.
  for (size_t i = 0; i < sphere.vertices.size(); i += 7)
    CHECK_FALSE(grid.contains(sphere.vertices[i]));

  // A whisker inside the surface is still inside.
  const Vec3 v = sphere.vertices[0];
  CHECK(grid.contains(v * (1.0 - 1e-3)));
  CHECK_FALSE(grid.contains(v * (1.0 + 1e-3)));

  // Fuzzed radial classification away from the surface.
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    Vec3 dir(u(rng), u(rng), u(rng));
    if (dir.norm() < 1e-6) continue;
    dir.normalize();
    CHECK(grid.contains(dir * 0.09));       // icosphere at subdiv 3 stays outside r=0.09
    CHECK_FALSE(grid.contains(dir * 0.11));
  }

  CHECK_FALSE(TriGrid().contains(Vec3(0, 0, 0)));
}
