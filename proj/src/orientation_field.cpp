#include "hairrec/orientation_field.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>

namespace hairrec {

bool OrientationField::contains(const Vec3& p) const {
  const Vec3 rel = p - origin;
  const double edge = voxel * n;
  for (int a = 0; a < 3; ++a)
    if (rel[a] < 0.0 || rel[a] > edge) return false;
  return true;
}

Vec3 OrientationField::sample(const Vec3& p) const {
  // Continuous lattice coordinates with voxel centers at integers.
  Vec3 g = (p - origin) / voxel - Vec3::Constant(0.5);
  for (int a = 0; a < 3; ++a) g[a] = std::clamp(g[a], 0.0, static_cast<double>(n - 1));
  const int i0 = std::min(n - 2 < 0 ? 0 : n - 2, static_cast<int>(std::floor(g.x())));
  const int j0 = std::min(n - 2 < 0 ? 0 : n - 2, static_cast<int>(std::floor(g.y())));
  const int k0 = std::min(n - 2 < 0 ? 0 : n - 2, static_cast<int>(std::floor(g.z())));
  const double fx = g.x() - i0, fy = g.y() - j0, fz = g.z() - k0;
  Vec3 acc = Vec3::Zero();
  for (int dk = 0; dk < 2; ++dk)
    for (int dj = 0; dj < 2; ++dj)
      for (int di = 0; di < 2; ++di) {
        if (!in_range(i0 + di, j0 + dj, k0 + dk)) continue;
        const double w = (di ? fx : 1.0 - fx) * (dj ? fy : 1.0 - fy) * (dk ? fz : 1.0 - fz);
        acc += w * values[index(i0 + di, j0 + dj, k0 + dk)];
      }
  return acc;
}

namespace {

struct Accum {
  Vec3 c_sum = Vec3::Zero();
  Vec3 q_sum = Vec3::Zero();
  bool c_hit = false;
  bool q_hit = false;
};

void locate(const OrientationField& f, const Vec3& p, int& i, int& j, int& k) {
  const Vec3 g = (p - f.origin) / f.voxel;
  i = static_cast<int>(std::floor(g.x()));
  j = static_cast<int>(std::floor(g.y()));
  k = static_cast<int>(std::floor(g.z()));
}

}  // namespace

OrientationField build_orientation_field(const StrandSet& best, const QueryStrands& query,
                                         const TriangleMesh& head, const SceneConfig& cfg,
                                         std::vector<Vec3>* raw) {
  OrientationField field;
  field.n = cfg.field_resolution;
  if (field.n < 8)
    throw Error(ErrorKind::Argument, "build_orientation_field: resolution must be >= 8");

  Aabb box = head.bounds();
  for (const Strand& s : best.strands)
    for (const Vec3& v : s.vertices) box.expand(v);
  for (const Strand& s : query.set.strands)
    for (const Vec3& v : s.vertices) box.expand(v);
  if (!box.valid())
    throw Error(ErrorKind::DegenerateGeometry, "build_orientation_field: empty bounds");
  const double max_extent = box.extent().maxCoeff();
  if (max_extent <= 0.0)
    throw Error(ErrorKind::DegenerateGeometry, "build_orientation_field: degenerate bounds");

  // Leave a margin of the influence radius at each wall so dilated
  // constraints stay inside the lattice.
  const int usable = field.n - 2 * cfg.field_influence_radius;
  field.voxel = max_extent / usable;
  field.origin = box.center() - Vec3::Constant(0.5 * field.n * field.voxel);

  const int nv = field.n * field.n * field.n;
  std::vector<Accum> acc(nv);

  // Set C: directions rasterized along best-match strand segments.
  for (const Strand& s : best.strands) {
    for (size_t v = 0; v + 1 < s.vertices.size(); ++v) {
      const Vec3 a = s.vertices[v], b = s.vertices[v + 1];
      const double len = (b - a).norm();
      if (len <= 0.0) continue;
      const Vec3 dir = (b - a) / len;
      const int steps = std::max(1, static_cast<int>(std::ceil(len / (0.5 * field.voxel))));
      for (int t = 0; t <= steps; ++t) {
        const Vec3 p = a + (static_cast<double>(t) / steps) * (b - a);
        int i, j, k;
        locate(field, p, i, j, k);
        if (!field.in_range(i, j, k)) continue;
        Accum& cell = acc[field.index(i, j, k)];
        cell.c_sum += dir;
        cell.c_hit = true;
      }
    }
  }

  // Set Q: query tangents stamped into a ball of field_influence_radius.
  const int r = cfg.field_influence_radius;
  std::vector<std::array<int, 3>> ball;
  for (int dz = -r; dz <= r; ++dz)
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx)
        if (dx * dx + dy * dy + dz * dz <= r * r) ball.push_back({dx, dy, dz});
  for (const Strand& s : query.set.strands) {
    for (size_t v = 0; v < s.vertices.size(); ++v) {
      int i, j, k;
      locate(field, s.vertices[v], i, j, k);
      const Vec3 dir = s.tangents[v];
      for (const auto& d : ball) {
        const int ii = i + d[0], jj = j + d[1], kk = k + d[2];
        if (!field.in_range(ii, jj, kk)) continue;
        Accum& cell = acc[field.index(ii, jj, kk)];
        cell.q_sum += dir;
        cell.q_hit = true;
      }
    }
  }

  field.constraint.assign(nv, 0);
  std::vector<Vec3> c_dir(nv, Vec3::Zero()), q_dir(nv, Vec3::Zero());
  int n_constrained = 0;
  for (int idx = 0; idx < nv; ++idx) {
    int8_t kind = 0;
    if (acc[idx].c_hit && acc[idx].c_sum.norm() > 1e-12) {
      c_dir[idx] = acc[idx].c_sum.normalized();
      kind |= 1;
    }
    if (acc[idx].q_hit && acc[idx].q_sum.norm() > 1e-12) {
      q_dir[idx] = acc[idx].q_sum.normalized();
      kind |= 2;
    }
    field.constraint[idx] = kind;
    if (kind) ++n_constrained;
  }
  if (n_constrained == 0)
    throw Error(ErrorKind::EmptyResult, "build_orientation_field: no constrained voxels");

  // Grid Laplacian over the 6-neighborhood, natural treatment at walls.
  using Sparse = Eigen::SparseMatrix<double>;
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(nv) * 7);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nv, 3);
  const int n = field.n;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int idx = field.index(i, j, k);
        int degree = 0;
        const int di[6] = {-1, 1, 0, 0, 0, 0};
        const int dj[6] = {0, 0, -1, 1, 0, 0};
        const int dk[6] = {0, 0, 0, 0, -1, 1};
        for (int t = 0; t < 6; ++t) {
          const int ii = i + di[t], jj = j + dj[t], kk = k + dk[t];
          if (!field.in_range(ii, jj, kk)) continue;
          ++degree;
          trip.emplace_back(idx, field.index(ii, jj, kk), -1.0);
        }
        double diag = degree;
        if (field.constraint[idx] & 1) {
          diag += cfg.field_w1;
          rhs.row(idx) += cfg.field_w1 * c_dir[idx].transpose();
        }
        if (field.constraint[idx] & 2) {
          diag += cfg.field_w2;
          rhs.row(idx) += cfg.field_w2 * q_dir[idx].transpose();
        }
        trip.emplace_back(idx, idx, diag);
      }
  Sparse a(nv, nv);
  a.setFromTriplets(trip.begin(), trip.end());

  Eigen::ConjugateGradient<Sparse, Eigen::Lower | Eigen::Upper,
                           Eigen::IncompleteCholesky<double>>
      solver;
  solver.setTolerance(1e-10);
  solver.setMaxIterations(10000);
  solver.compute(a);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Convergence, "build_orientation_field: preconditioner failed");
  const Eigen::MatrixXd sol = solver.solve(rhs);
  const double rel = (a * sol - rhs).norm() / (rhs.norm() + 1e-30);
  if (!(rel <= 1e-8))
    throw Error(ErrorKind::Convergence, "build_orientation_field: relative residual " +
                                            std::to_string(rel) + " exceeds 1e-8");

  field.values.resize(nv);
  for (int idx = 0; idx < nv; ++idx) field.values[idx] = sol.row(idx).transpose();
  if (raw) *raw = field.values;
  for (Vec3& v : field.values) {
    const double norm = v.norm();
    v = norm > 1e-12 ? Vec3(v / norm) : Vec3::Zero();
  }
  return field;
}

StrandSet regrow_strands(const OrientationField& field, const TriangleMesh& head,
                         const SceneConfig& cfg) {
  if (field.values.empty())
    throw Error(ErrorKind::Argument, "regrow_strands: field not solved");
  if (!head.has_flag("scalp_root"))
    throw Error(ErrorKind::Validation, "regrow_strands: head mesh has no scalp_root flags");
  const std::vector<uint8_t>& root_flag = head.vertex_flags.at("scalp_root");
  std::vector<int> roots;
  for (size_t i = 0; i < root_flag.size(); ++i)
    if (root_flag[i]) roots.push_back(static_cast<int>(i));
  if (roots.empty())
    throw Error(ErrorKind::Validation, "regrow_strands: no scalp_root vertex is set");

  const std::vector<Vec3> normals = vertex_normals(head);
  const TriGrid head_grid(head);
  const double h = field.voxel;

  StrandSet out;
  out.source_tag = "regrown";
  for (const int root : roots) {
    Strand s;
    // The root sits exactly on the mesh; integration launches slightly above
    // it so a near-tangential first step does not chord into a convex scalp.
    s.vertices.push_back(head.vertices[root]);
    Vec3 p = head.vertices[root] + 0.1 * h * normals[root];
    for (int step = 0; step < cfg.regrow_max_steps; ++step) {
      Vec3 v = field.sample(p);
      // At the launch point the interpolation mixes in under-scalp voxels; an
      // inward launch is projected back to the tangent plane so the strand
      // leaves the surface. A direction with no tangential part (whorl
      // center) still terminates.
      if (step == 0 && v.dot(normals[root]) < 0.0)
        v -= v.dot(normals[root]) * normals[root];
      const double mag = v.norm();
      if (mag < cfg.regrow_min_magnitude) break;
      const Vec3 next = p + h * (v / mag);
      if (!field.contains(next)) break;
      if (head_grid.segment_hits(p, next)) break;
      s.vertices.push_back(next);
      p = next;
    }
    if (s.vertices.size() < 2) continue;
    s.recompute_tangents();
    out.strands.push_back(std::move(s));
  }
  return out;
}

}  // namespace hairrec
