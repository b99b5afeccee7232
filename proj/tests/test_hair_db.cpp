#include "doctest.h"

#include "hairrec/hair_db.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hairrec/io.hpp"
#include "hairrec/synth.hpp"
#include "test_util.hpp"

using namespace hairrec;

namespace {

// Meridian strands pole to pole. Alternating the start pole keeps the
// scalp-root bounding box (and with it the inner-layer ray origin) at the
// sphere center.
StrandSet shell_meridians(double radius, double pt_spacing, double merid_spacing) {
  StrandSet set;
  const int n_m = std::max(8, static_cast<int>(std::ceil(2 * kPi * radius / merid_spacing)));
  const int n_p = std::max(4, static_cast<int>(std::ceil(kPi * radius / pt_spacing)));
  for (int j = 0; j < n_m; ++j) {
    const double ph = 2 * kPi * j / n_m;
    std::vector<Vec3> pts;
    for (int i = 0; i <= n_p; ++i) {
      double th = kPi * i / n_p;
      if (j % 2 == 1) th = kPi - th;
      pts.push_back(Vec3(radius * std::sin(th) * std::cos(ph), radius * std::cos(th),
                         radius * std::sin(th) * std::sin(ph)));
    }
    set.strands.push_back(testutil::make_strand(pts));
  }
  return set;
}

Hairstyle shell_style(const std::string& id, double radius) {
  Hairstyle style;
  style.id = id;
  style.strands = shell_meridians(radius, 0.004, 0.004);
  return style;
}

// Random-walk style blob around `center`, deterministic per seed.
StrandSet blob_strands(const Vec3& center, unsigned seed, int n_strands, int n_verts) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> off(-0.02, 0.02);
  StrandSet set;
  for (int s = 0; s < n_strands; ++s) {
    std::vector<Vec3> pts = {center + Vec3(off(rng), off(rng), off(rng))};
    for (int i = 1; i < n_verts; ++i)
      pts.push_back(pts.back() +
                    0.003 * testutil::random_vec(rng, -1.0, 1.0).normalized());
    set.strands.push_back(testutil::make_strand(pts));
  }
  return set;
}

DatabaseEntry make_entry(const std::string& id, const StrandSet& strands) {
  DatabaseEntry e;
  e.style.id = id;
  e.style.strands = strands;
  e.index = build_style_index(strands, 0.004);
  return e;
}

}  // namespace

TEST_CASE("build_rough_mesh approximates a strand shell") {
  const SceneConfig cfg;
  const double sphere_area = 4 * kPi * 0.1 * 0.1;
  const Hairstyle style = shell_style("shell", 0.1);
  const RoughMesh rough = build_rough_mesh(style, cfg);

  SUBCASE("area tracks the sphere and only the outer sheet survives") {
    CHECK(rough.owner == "shell");
    CHECK(rough.surface_area > 0.85 * sphere_area);
    CHECK(rough.surface_area < 1.15 * sphere_area);
    CHECK(rough.mesh.vertices.size() >= 1000);
    CHECK(rough.mesh.vertices.size() <= 20000);
    CHECK(rough.x_extent == doctest::Approx(0.2).epsilon(0.08));
    CHECK(rough.y_extent == doctest::Approx(0.2).epsilon(0.08));
    for (const auto& v : rough.mesh.vertices) {
      CHECK(v.norm() > 0.09);   // the inner sheet of the voxel shell is gone
      CHECK(v.norm() < 0.11);
    }
  }

  SUBCASE("no vertex is shadowed by an outer layer") {
    const TriGrid tg(rough.mesh);
    const double eps = 0.25 * cfg.db_voxel_size;
    for (const auto& v : rough.mesh.vertices) {
      const double d = v.norm();
      REQUIRE(d > 1e-12);
      CHECK_FALSE(tg.raycast(v, v / d, 2.0 * eps, 1.0).has_value());
    }
  }

  SUBCASE("an inner concentric shell leaves no trace") {
    Hairstyle two = shell_style("two", 0.1);
    for (const auto& s : shell_meridians(0.05, 0.004, 0.004).strands)
      two.strands.strands.push_back(s);
    const RoughMesh both = build_rough_mesh(two, cfg);
    CHECK(both.mesh.vertices.size() == rough.mesh.vertices.size());
    CHECK(std::abs(both.surface_area - rough.surface_area) <= 1e-12);
    for (const auto& v : both.mesh.vertices) CHECK(v.norm() > 0.08);
  }

  SUBCASE("zero smoothing yields a blockier, larger surface") {
    SceneConfig cfg0 = cfg;
    cfg0.db_smooth_iters = 0;
    const RoughMesh blocky = build_rough_mesh(style, cfg0);
    CHECK(blocky.surface_area >= rough.surface_area);
  }

  SUBCASE("rebuilding is deterministic") {
    const RoughMesh again = build_rough_mesh(style, cfg);
    REQUIRE(again.mesh.vertices.size() == rough.mesh.vertices.size());
    REQUIRE(again.mesh.faces.size() == rough.mesh.faces.size());
    for (size_t i = 0; i < rough.mesh.vertices.size(); ++i)
      CHECK((again.mesh.vertices[i] - rough.mesh.vertices[i]).norm() == 0.0);
    CHECK(again.surface_area == rough.surface_area);
  }

  SUBCASE("empty styles are rejected") {
    Hairstyle none;
    none.id = "none";
    CHECK_THROWS_WITH_AS(build_rough_mesh(none, cfg),
                         doctest::Contains("has no strands"), Error);
    Hairstyle hollow;
    hollow.id = "hollow";
    hollow.strands.strands.push_back(Strand{});
    CHECK_THROWS_WITH_AS(build_rough_mesh(hollow, cfg),
                         doctest::Contains("no vertices"), Error);
  }
}

TEST_CASE("build_rough_mesh wraps a single strand in a tube") {
  const SceneConfig cfg;
  Hairstyle style;
  style.id = "tube";
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i) pts.push_back(Vec3(0.004 * i, 0.0, 0.0));
  style.strands.strands.push_back(testutil::make_strand(pts));

  const RoughMesh rough = build_rough_mesh(style, cfg);
  CHECK(!rough.mesh.vertices.empty());
  CHECK(rough.surface_area > 0.0);
  const Aabb b = rough.mesh.bounds();
  CHECK(b.min.x() < 0.008);
  CHECK(b.max.x() > 0.068);
  CHECK(std::max(std::abs(b.min.y()), std::abs(b.max.y())) < 0.01);
  CHECK(std::max(std::abs(b.min.z()), std::abs(b.max.z())) < 0.01);
  const TriGrid tg(rough.mesh);
  for (int i = 4; i <= 15; ++i) CHECK(tg.contains(pts[i]));
}

TEST_CASE("build_style_index decimates and records the penalty") {
  const Strand s = testutil::line_strand(Vec3::Zero(), Vec3::UnitX(), 10, 0.002);
  StrandSet set;
  set.strands.push_back(s);

  SUBCASE("decimation keeps original vertices at the requested spacing") {
    const StyleIndex idx = build_style_index(set, 0.0039);
    REQUIRE(idx.points.size() == 5);  // every other vertex of the 0.002 line
    for (int k = 0; k < 5; ++k) {
      CHECK((idx.points[k] - s.vertices[2 * k]).norm() == 0.0);
      CHECK((idx.tangents[k] - s.tangents[2 * k]).norm() == 0.0);
    }
  }

  SUBCASE("the penalty is the undecimated bounding-box diagonal") {
    const StyleIndex idx = build_style_index(set, 0.0039);
    const double diag = (s.vertices.back() - s.vertices.front()).norm();
    CHECK(idx.penalty == doctest::Approx(diag).epsilon(1e-12));
  }

  SUBCASE("multiple strands concatenate in order") {
    StrandSet two = set;
    two.strands.push_back(
        testutil::line_strand(Vec3(0.0, 0.05, 0.0), Vec3::UnitY(), 6, 0.005));
    const StyleIndex idx = build_style_index(two, 0.0039);
    CHECK(idx.points.size() == 5 + 6);  // 0.005 steps all survive decimation
    CHECK((idx.points[5] - Vec3(0.0, 0.05, 0.0)).norm() == 0.0);
  }

  SUBCASE("an empty set cannot be indexed") {
    CHECK_THROWS_WITH_AS(build_style_index(StrandSet{}, 0.004),
                         "build_style_index: no index points", Error);
  }
}

TEST_CASE("strand_set_distance obeys the tangent constraint") {
  const Strand h = testutil::line_strand(Vec3::Zero(), Vec3::UnitX(), 10, 0.004);
  StrandSet style;
  style.strands.push_back(h);
  const StyleIndex idx = build_style_index(style, 0.0039);
  REQUIRE(idx.points.size() == 10);

  SUBCASE("a subset of the style with matching tangents has distance zero") {
    std::vector<Vec3> sub = {h.vertices[1], h.vertices[2], h.vertices[5], h.vertices[6]};
    StrandSet q;
    q.strands.push_back(testutil::make_strand({sub[0], sub[1]}));
    q.strands.push_back(testutil::make_strand({sub[2], sub[3]}));
    CHECK(strand_set_distance(q, idx) == 0.0);
    CHECK(strand_set_distance_brute(q, idx) == 0.0);
  }

  SUBCASE("reversed tangents make every vertex inadmissible") {
    std::vector<Vec3> rev(h.vertices.rbegin(), h.vertices.rend());
    StrandSet q;
    q.strands.push_back(testutil::make_strand(rev));
    const double d = strand_set_distance(q, idx);
    CHECK(d == doctest::Approx(10.0 * idx.penalty).epsilon(1e-12));
    CHECK(strand_set_distance_brute(q, idx) == doctest::Approx(d).epsilon(1e-12));
  }

  SUBCASE("an exactly perpendicular tangent is not admissible") {
    Strand q1;
    q1.vertices = {h.vertices[3], h.vertices[4]};
    q1.tangents = {Vec3::UnitY(), Vec3::UnitY()};  // dot with UnitX is exactly 0
    StrandSet q;
    q.strands.push_back(q1);
    CHECK(strand_set_distance(q, idx) == doctest::Approx(2.0 * idx.penalty).epsilon(1e-12));
  }

  SUBCASE("the penalty is charged per vertex") {
    Strand mixed;
    mixed.vertices = {h.vertices[2], h.vertices[7]};
    mixed.tangents = {Vec3::UnitX(), -Vec3::UnitX()};   // one match, one reversal
    StrandSet q;
    q.strands.push_back(mixed);
    CHECK(strand_set_distance(q, idx) == doctest::Approx(idx.penalty).epsilon(1e-12));
  }
}

TEST_CASE("strand_set_distance accelerated equals brute force") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> style_verts(8, 25);
  std::uniform_int_distribution<int> query_verts(4, 10);
  std::uniform_real_distribution<double> step(0.001, 0.008);

  auto walk = [&](int n, const Vec3& from) {
    std::vector<Vec3> pts = {from};
    for (int i = 1; i < n; ++i)
      pts.push_back(pts.back() + step(rng) * testutil::random_vec(rng, -1.0, 1.0).normalized());
    return testutil::make_strand(pts);
  };

  for (int trial = 0; trial < 120; ++trial) {
    StrandSet style;
    for (int s = 0; s < 4; ++s)
      style.strands.push_back(
          walk(style_verts(rng), testutil::random_vec(rng, -0.05, 0.05)));
    const StyleIndex idx = build_style_index(style, 0.004);

    StrandSet q;
    for (int s = 0; s < 2; ++s)
      q.strands.push_back(walk(query_verts(rng), testutil::random_vec(rng, -0.05, 0.05)));

    const double fast = strand_set_distance(q, idx);
    const double brute = strand_set_distance_brute(q, idx);
    CHECK(fast >= 0.0);
    CHECK(std::abs(fast - brute) <= 1e-9);
  }
}

TEST_CASE("prune filters by extents and area") {
  const TriangleMesh x_h = make_icosphere(0.1, 2);
  const Aabb box = x_h.bounds();
  const double xe = box.extent().x();
  const double ye = box.extent().y();
  const double area = x_h.surface_area();

  auto fake_entry = [](const std::string& id, double x, double y, double a) {
    DatabaseEntry e;
    e.style.id = id;
    e.rough.owner = id;
    e.rough.x_extent = x;
    e.rough.y_extent = y;
    e.rough.surface_area = a;
    return e;
  };

  SUBCASE("band membership, including the strict boundaries") {
    HairDatabase db;
    db.entries.push_back(fake_entry("same", xe, ye, area));
    db.entries.push_back(fake_entry("xnarrow", 0.5 * xe, ye, area));
    db.entries.push_back(fake_entry("xlow", 0.8 * xe, ye, area));    // boundary: out
    db.entries.push_back(fake_entry("ahigh", xe, ye, 1.5 * area));   // boundary: out
    db.entries.push_back(fake_entry("inside", 1.1 * xe, 0.9 * ye, 1.4 * area));
    db.entries.push_back(fake_entry("ylow", xe, 0.7 * ye, area));
    const auto kept = prune(x_h, db);
    CHECK(kept == std::vector<std::string>{"same", "inside"});
  }

  SUBCASE("the kept set equals the predicate evaluated brute force") {
    std::mt19937_64 rng(555);
    std::uniform_real_distribution<double> f(0.5, 2.0);
    HairDatabase db;
    std::vector<std::string> expect;
    for (int i = 0; i < 200; ++i) {
      const double x = f(rng) * xe, y = f(rng) * ye, a = f(rng) * area;
      const std::string id = "e" + std::to_string(i);
      db.entries.push_back(fake_entry(id, x, y, a));
      const bool keep = x > 0.8 * xe && x < 1.2 * xe && y > 0.8 * ye && y < 1.2 * ye &&
                        a > 0.8 * area && a < 1.5 * area;
      if (keep) expect.push_back(id);
    }
    REQUIRE(!expect.empty());
    CHECK(prune(x_h, db) == expect);
  }

  SUBCASE("an empty candidate set advises relaxation") {
    HairDatabase db;
    db.entries.push_back(fake_entry("tiny", 0.1 * xe, 0.1 * ye, 0.1 * area));
    CHECK_THROWS_WITH_AS(prune(x_h, db), doctest::Contains("relax"), Error);
  }

  SUBCASE("an empty hull is rejected") {
    HairDatabase db;
    db.entries.push_back(fake_entry("same", xe, ye, area));
    CHECK_THROWS_WITH_AS(prune(TriangleMesh{}, db), "prune: empty X_h", Error);
  }
}

TEST_CASE("retrieve ranks candidates by distance") {
  HairDatabase db;
  std::vector<std::string> ids;
  for (int k = 0; k < 5; ++k) {
    StrandSet style;
    for (int j = 0; j < 3; ++j)
      style.strands.push_back(testutil::line_strand(
          Vec3(1.0 * k, 0.002 * j, 0.0), Vec3::UnitZ(), 12, 0.004));
    const std::string id = "s" + std::to_string(k);
    db.entries.push_back(make_entry(id, style));
    ids.push_back(id);
  }

  // Query: exact index points of s2 in 2-point strands (tangents align).
  const StyleIndex& idx2 = db.entries[2].index;
  StrandSet q;
  for (size_t i = 0; i + 1 < idx2.points.size(); i += 4)
    q.strands.push_back(testutil::make_strand({idx2.points[i], idx2.points[i + 1]}));

  SUBCASE("self retrieval wins with distance zero and matches brute force") {
    const auto ranked = retrieve(q, db, ids, 5);
    REQUIRE(ranked.size() == 5);
    CHECK(ranked[0].id == "s2");
    CHECK(ranked[0].distance == 0.0);

    std::vector<RankedStyle> oracle;
    for (const auto& id : ids)
      oracle.push_back({id, strand_set_distance_brute(q, db.find(id)->index)});
    std::sort(oracle.begin(), oracle.end(), [](const RankedStyle& a, const RankedStyle& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    });
    for (size_t i = 0; i < ranked.size(); ++i) {
      CHECK(ranked[i].id == oracle[i].id);
      CHECK(ranked[i].distance == doctest::Approx(oracle[i].distance).epsilon(1e-9));
    }

    const auto top2 = retrieve(q, db, ids, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].id == ranked[0].id);
    CHECK(top2[1].id == ranked[1].id);
  }

  SUBCASE("exact distance ties break by id") {
    HairDatabase twins;
    StrandSet style;
    style.strands.push_back(testutil::line_strand(Vec3::Zero(), Vec3::UnitX(), 8, 0.004));
    twins.entries.push_back(make_entry("zz", style));
    twins.entries.push_back(make_entry("aa", style));
    StrandSet probe;
    probe.strands.push_back(
        testutil::line_strand(Vec3(0.001, 0.0, 0.0), Vec3::UnitX(), 4, 0.004));
    const auto ranked = retrieve(probe, twins, {"zz", "aa"}, 2);
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].id == "aa");
    CHECK(ranked[1].id == "zz");
    CHECK(ranked[0].distance == ranked[1].distance);
  }

  SUBCASE("bad arguments are rejected") {
    CHECK_THROWS_WITH_AS(retrieve(q, db, {}, 1), "retrieve: no candidates", Error);
    CHECK_THROWS_WITH_AS(retrieve(q, db, ids, 0),
                         "retrieve: k outside [1, candidate count]", Error);
    CHECK_THROWS_WITH_AS(retrieve(q, db, ids, 6),
                         "retrieve: k outside [1, candidate count]", Error);
    CHECK_THROWS_WITH_AS(retrieve(q, db, {"ghost"}, 1),
                         doctest::Contains("unknown candidate 'ghost'"), Error);
  }
}

TEST_CASE("database build and load round-trip") {
  const SceneConfig cfg;
  const auto dir = testutil::fresh_dir("hairdb_io");
  const std::vector<std::string> ids = {"a", "b", "c"};
  for (size_t k = 0; k < ids.size(); ++k)
    save_strands(dir / (ids[k] + ".hstr"),
                 blob_strands(Vec3(0.05 * k, 0.0, 0.0), 100 + k, 50, 10));

  const HairDatabase built = build_database(dir, cfg);
  REQUIRE(built.entries.size() == 3);
  for (size_t k = 0; k < ids.size(); ++k) {
    CHECK(built.entries[k].style.id == ids[k]);
    CHECK(built.entries[k].rough.mesh.vertices.size() > 0);
    CHECK(std::filesystem::exists(dir / (ids[k] + "_rough.obj")));
  }

  SUBCASE("meta.txt lists every entry with its vertex count") {
    std::istringstream meta(testutil::slurp(dir / "meta.txt"));
    std::string line;
    size_t k = 0;
    while (std::getline(meta, line)) {
      REQUIRE(k < ids.size());
      std::istringstream fields(line);
      std::string id;
      double x, y, a;
      size_t verts;
      REQUIRE((fields >> id >> x >> y >> a >> verts));
      CHECK(id == ids[k]);
      CHECK(x == doctest::Approx(built.entries[k].rough.x_extent).epsilon(1e-12));
      CHECK(verts == built.entries[k].rough.mesh.vertices.size());
      ++k;
    }
    CHECK(k == ids.size());
  }

  SUBCASE("loading restores the cached rough meshes and indices") {
    const HairDatabase loaded = load_database(dir, cfg);
    REQUIRE(loaded.entries.size() == built.entries.size());
    for (size_t k = 0; k < built.entries.size(); ++k) {
      const auto& b = built.entries[k];
      const auto& l = loaded.entries[k];
      CHECK(l.style.id == b.style.id);
      CHECK(l.style.strands.source_tag == b.style.id);
      CHECK(l.rough.mesh.vertices.size() == b.rough.mesh.vertices.size());
      CHECK(l.rough.surface_area == doctest::Approx(b.rough.surface_area).epsilon(1e-12));
      CHECK(l.rough.x_extent == doctest::Approx(b.rough.x_extent).epsilon(1e-12));
      CHECK(l.index.points.size() == b.index.points.size());
      CHECK(l.index.penalty == doctest::Approx(b.index.penalty).epsilon(1e-12));
    }
  }

  SUBCASE("rebuilding is byte-stable") {
    const std::string meta_before = testutil::slurp(dir / "meta.txt");
    build_database(dir, cfg);
    CHECK(testutil::slurp(dir / "meta.txt") == meta_before);
  }

  SUBCASE("missing or empty directories fail with ingest errors") {
    CHECK_THROWS_WITH_AS(load_database(dir / "nope", cfg),
                         doctest::Contains("database directory not found"), Error);
    const auto empty = testutil::fresh_dir("hairdb_empty");
    CHECK_THROWS_WITH_AS(load_database(empty, cfg),
                         doctest::Contains("no .hstr styles"), Error);
  }
}
