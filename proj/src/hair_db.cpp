#include "hairrec/hair_db.hpp"

#include "hairrec/io.hpp"
#include "hairrec/voxel_grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hairrec {

RoughMesh build_rough_mesh(const Hairstyle& style, const SceneConfig& cfg) {
  if (style.strands.strands.empty())
    throw Error(ErrorKind::Argument, "build_rough_mesh: style '" + style.id + "' has no strands");
  const double h = cfg.db_voxel_size;

  Aabb box;
  Aabb scalp_box;
  for (const auto& s : style.strands.strands) {
    for (const auto& v : s.vertices) box.expand(v);
    if (!s.vertices.empty()) scalp_box.expand(s.vertices.front());
  }
  if (!box.valid()) throw Error(ErrorKind::EmptyResult, "build_rough_mesh: no vertices");

  const Vec3 origin = box.min - Vec3::Constant(1.5 * h);
  const Vec3 ext = box.extent() + Vec3::Constant(3.0 * h);
  VoxelGrid grid(origin, h, std::max(1, static_cast<int>(std::ceil(ext.x() / h))),
                 std::max(1, static_cast<int>(std::ceil(ext.y() / h))),
                 std::max(1, static_cast<int>(std::ceil(ext.z() / h))));
  for (const auto& s : style.strands.strands) {
    for (const auto& v : s.vertices) {
      int i, j, k;
      grid.locate(v, i, j, k);
      if (grid.in_range(i, j, k)) grid.set(i, j, k, true);
    }
  }
  if (grid.count_occupied() == 0)
    throw Error(ErrorKind::EmptyResult, "build_rough_mesh: empty occupancy");

  TriangleMesh mesh = extract_surface(grid);
  laplacian_smooth(mesh, cfg.db_smooth_iters, cfg.db_smooth_step);

  // Inner-layer removal: shoot from the head center through each vertex; any
  // hit beyond the vertex means an outer layer shadows it.
  const Vec3 center = scalp_box.center();
  const TriGrid tri_grid(mesh);
  const double far = 2.0 * box.diagonal() + 1.0;
  const double eps = 0.25 * h;
  std::vector<uint8_t> remove(mesh.vertices.size(), 0);
  for (size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Vec3 rel = mesh.vertices[v] - center;
    const double dist = rel.norm();
    if (dist < 1e-12) continue;
    const Vec3 u = rel / dist;
    if (tri_grid.raycast(mesh.vertices[v], u, 2.0 * eps, far)) remove[v] = 1;
  }

  RoughMesh rough;
  rough.mesh = remove_vertices(mesh, remove);
  if (rough.mesh.vertices.empty())
    throw Error(ErrorKind::EmptyResult, "build_rough_mesh: every vertex removed");

  // The removal leaves small floating crumbs where inner and outer layers
  // met; the rough proxy is the main shell only.
  std::vector<int> comp;
  const int n_comp = connected_components(rough.mesh, comp);
  if (n_comp > 1) {
    std::vector<int> count(n_comp, 0);
    for (int c : comp) ++count[c];
    const int main_comp = static_cast<int>(
        std::max_element(count.begin(), count.end()) - count.begin());
    std::vector<uint8_t> off_main(comp.size(), 0);
    for (size_t v = 0; v < comp.size(); ++v) off_main[v] = comp[v] != main_comp;
    rough.mesh = remove_vertices(rough.mesh, off_main);
  }
  rough.surface_area = rough.mesh.surface_area();
  const Aabb rbox = rough.mesh.bounds();
  rough.x_extent = rbox.extent().x();
  rough.y_extent = rbox.extent().y();
  rough.owner = style.id;
  return rough;
}

StyleIndex build_style_index(const StrandSet& strands, double spacing) {
  StyleIndex index;
  Aabb box;
  for (const auto& s : strands.strands) {
    const Strand d = decimate_strand(s, spacing);
    for (size_t i = 0; i < d.vertices.size(); ++i) {
      index.points.push_back(d.vertices[i]);
      index.tangents.push_back(d.tangents[i]);
    }
    for (const auto& v : s.vertices) box.expand(v);
  }
  if (index.points.empty())
    throw Error(ErrorKind::EmptyResult, "build_style_index: no index points");
  index.penalty = box.diagonal();
  index.tree = KdTree3(index.points);
  return index;
}

std::vector<std::string> prune(const TriangleMesh& x_h, const HairDatabase& db) {
  if (x_h.vertices.empty()) throw Error(ErrorKind::Argument, "prune: empty X_h");
  const Aabb box = x_h.bounds();
  const double xe = box.extent().x();
  const double ye = box.extent().y();
  const double area = x_h.surface_area();

  std::vector<std::string> kept;
  for (const auto& e : db.entries) {
    const bool ok = e.rough.x_extent > 0.8 * xe && e.rough.x_extent < 1.2 * xe &&
                    e.rough.y_extent > 0.8 * ye && e.rough.y_extent < 1.2 * ye &&
                    e.rough.surface_area > 0.8 * area && e.rough.surface_area < 1.5 * area;
    if (ok) kept.push_back(e.style.id);
  }
  if (kept.empty())
    throw Error(ErrorKind::EmptyResult,
                "prune: no database entry matches the hull extents/area; relax the 0.8/1.2 "
                "extent or 0.8/1.5 area bands or extend the database");
  return kept;
}

double strand_set_distance(const StrandSet& q, const StyleIndex& index) {
  double total = 0.0;
  for (const auto& s : q.strands) {
    for (size_t i = 0; i < s.vertices.size(); ++i) {
      const Vec3& tangent = s.tangents[i];
      double dist = 0.0;
      const int hit = index.tree.nearest(
          s.vertices[i], [&](int j) { return index.tangents[j].dot(tangent) > 0.0; }, &dist);
      total += hit < 0 ? index.penalty : dist;
    }
  }
  return total;
}

double strand_set_distance_brute(const StrandSet& q, const StyleIndex& index) {
  double total = 0.0;
  for (const auto& s : q.strands) {
    for (size_t i = 0; i < s.vertices.size(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < index.points.size(); ++j) {
        if (index.tangents[j].dot(s.tangents[i]) <= 0.0) continue;
        best = std::min(best, (index.points[j] - s.vertices[i]).norm());
      }
      total += std::isfinite(best) ? best : index.penalty;
    }
  }
  return total;
}

std::vector<RankedStyle> retrieve(const StrandSet& q, const HairDatabase& db,
                                  const std::vector<std::string>& candidates, int k) {
  if (candidates.empty()) throw Error(ErrorKind::Argument, "retrieve: no candidates");
  if (k < 1 || static_cast<size_t>(k) > candidates.size())
    throw Error(ErrorKind::Argument, "retrieve: k outside [1, candidate count]");
  std::vector<RankedStyle> ranked;
  for (const auto& id : candidates) {
    const DatabaseEntry* e = db.find(id);
    if (!e) throw Error(ErrorKind::Argument, "retrieve: unknown candidate '" + id + "'");
    ranked.push_back({id, strand_set_distance(q, e->index)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const RankedStyle& a, const RankedStyle& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  ranked.resize(static_cast<size_t>(k));
  return ranked;
}

namespace {

std::vector<std::filesystem::path> style_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error(ErrorKind::Ingest, "database directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".hstr") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw Error(ErrorKind::Ingest, "no .hstr styles in database: " + dir.string());
  return files;
}

void write_meta(const std::filesystem::path& dir, const HairDatabase& db) {
  std::ostringstream meta;
  for (const auto& e : db.entries) {
    meta << e.style.id << " " << format_double(e.rough.x_extent) << " "
         << format_double(e.rough.y_extent) << " " << format_double(e.rough.surface_area)
         << " " << e.rough.mesh.vertices.size() << "\n";
  }
  write_text_file(dir / "meta.txt", meta.str());
}

}  // namespace

HairDatabase build_database(const std::filesystem::path& dir, const SceneConfig& cfg) {
  HairDatabase db;
  for (const auto& file : style_files(dir)) {
    DatabaseEntry e;
    e.style.id = file.stem().string();
    e.style.strands = load_strands(file);
    e.style.strands.source_tag = e.style.id;
    e.rough = build_rough_mesh(e.style, cfg);
    e.index = build_style_index(e.style.strands, cfg.db_sample_spacing);
    save_obj(dir / (e.style.id + "_rough.obj"), e.rough.mesh);
    db.entries.push_back(std::move(e));
  }
  write_meta(dir, db);
  return db;
}

HairDatabase load_database(const std::filesystem::path& dir, const SceneConfig& cfg) {
  HairDatabase db;
  for (const auto& file : style_files(dir)) {
    DatabaseEntry e;
    e.style.id = file.stem().string();
    e.style.strands = load_strands(file);
    e.style.strands.source_tag = e.style.id;
    const auto rough_path = dir / (e.style.id + "_rough.obj");
    if (std::filesystem::exists(rough_path)) {
      e.rough.mesh = load_obj(rough_path);
      e.rough.surface_area = e.rough.mesh.surface_area();
      const Aabb box = e.rough.mesh.bounds();
      e.rough.x_extent = box.extent().x();
      e.rough.y_extent = box.extent().y();
      e.rough.owner = e.style.id;
    } else {
      e.rough = build_rough_mesh(e.style, cfg);
    }
    e.index = build_style_index(e.style.strands, cfg.db_sample_spacing);
    db.entries.push_back(std::move(e));
  }
  return db;
}

}  // namespace hairrec
