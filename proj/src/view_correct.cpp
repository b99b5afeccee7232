#include "hairrec/view_correct.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace hairrec {

namespace {

// Ridge-regularized affine fit over the 1-ring (self included): solves for
// the displacement map so degenerate rings fall back toward the identity.
Mat34 fit_ring_transform(const std::vector<Vec3>& v, const std::vector<Vec3>& vp,
                         const std::vector<int>& ring, int self) {
  Mat34 identity = Mat34::Zero();
  identity.block<3, 3>(0, 0).setIdentity();
  std::vector<int> pts = ring;
  pts.push_back(self);
  if (pts.size() < 4) {
    Mat34 t = identity;
    t.col(3) = vp[self] - v[self];
    return t;
  }
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  Eigen::Matrix<double, 4, 3> rhs = Eigen::Matrix<double, 4, 3>::Zero();
  for (const int j : pts) {
    const Eigen::Vector4d h(v[j].x(), v[j].y(), v[j].z(), 1.0);
    m += h * h.transpose();
    rhs += h * (vp[j] - v[j]).transpose();
  }
  const double ridge = 1e-12 * m.trace();
  m += ridge * Eigen::Matrix4d::Identity();
  const Eigen::Matrix<double, 4, 3> delta = m.ldlt().solve(rhs);
  return identity + delta.transpose();
}

}  // namespace

AnchorTransforms view_correct(const RoughMesh& rough, const std::vector<Vec3>& targets,
                              const ConfidenceRegion& region, double lambda, double sigma) {
  const TriangleMesh& mesh = rough.mesh;
  const int n = static_cast<int>(mesh.vertices.size());
  if (n == 0) throw Error(ErrorKind::Argument, "view_correct: empty rough mesh");
  if (targets.size() != mesh.vertices.size())
    throw Error(ErrorKind::Argument, "view_correct: target count != vertex count");
  if (lambda <= 0.0) throw Error(ErrorKind::Argument, "view_correct: lambda must be positive");

  AnchorTransforms out;
  out.v = mesh.vertices;
  out.c.resize(n);
  for (int i = 0; i < n; ++i) {
    const Vec3& p = mesh.vertices[i];
    out.c[i] = region.confidence(std::atan2(p.x(), p.z()), sigma);
  }

  // Every connected component needs a pinned vertex or the normal equations
  // are singular (Laplacian nullspace = per-component constants).
  std::vector<int> comp;
  const int n_comp = connected_components(mesh, comp);
  std::vector<bool> anchored(n_comp, false);
  for (int i = 0; i < n; ++i)
    if (out.c[i] >= 1.0 - 1e-12) anchored[comp[i]] = true;
  for (int k = 0; k < n_comp; ++k)
    if (!anchored[k])
      throw Error(ErrorKind::DegenerateGeometry,
                  "view_correct: mesh component " + std::to_string(k) +
                      " has no full-confidence vertex; the system is singular");

  const std::vector<std::vector<int>> adj = vertex_adjacency(mesh);

  // Uniform graph Laplacian L = I - A_norm (rows with no neighbors are zero).
  using Sparse = Eigen::SparseMatrix<double>;
  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> lt;
  for (int i = 0; i < n; ++i) {
    if (adj[i].empty()) continue;
    lt.emplace_back(i, i, 1.0);
    const double w = -1.0 / static_cast<double>(adj[i].size());
    for (const int j : adj[i]) lt.emplace_back(i, j, w);
  }
  Sparse laplacian(n, n);
  laplacian.setFromTriplets(lt.begin(), lt.end());

  std::vector<Triplet> wt, dt;
  for (int i = 0; i < n; ++i) {
    wt.emplace_back(i, i, 1.0 - out.c[i]);
    dt.emplace_back(i, i, lambda * out.c[i]);
  }
  Sparse weight(n, n), data(n, n);
  weight.setFromTriplets(wt.begin(), wt.end());
  data.setFromTriplets(dt.begin(), dt.end());

  const Sparse lwl = laplacian.transpose() * weight * laplacian;
  const Sparse a = lwl + data;

  Eigen::MatrixXd v0(n, 3), x(n, 3);
  for (int i = 0; i < n; ++i) {
    v0.row(i) = mesh.vertices[i].transpose();
    x.row(i) = targets[i].transpose();
  }
  const Eigen::MatrixXd b = lwl * v0 + data * x;

  Eigen::SimplicialLDLT<Sparse> solver(a);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::Convergence, "view_correct: factorization failed");
  const Eigen::MatrixXd vp = solver.solve(b);
  const double rel = (a * vp - b).norm() / (b.norm() + 1e-30);
  if (!(rel <= 1e-10))
    throw Error(ErrorKind::Convergence,
                "view_correct: relative residual " + std::to_string(rel) + " exceeds 1e-10");

  out.v_prime.resize(n);
  for (int i = 0; i < n; ++i) out.v_prime[i] = vp.row(i).transpose();

  out.T.resize(n);
  for (int i = 0; i < n; ++i) out.T[i] = fit_ring_transform(out.v, out.v_prime, adj[i], i);

  out.build_tree();
  return out;
}

Mat34 blend_transform(const Vec3& p, const AnchorTransforms& anchors, double alpha,
                      double sigma_w, int n_neighbors, BlendCoefficients* coefs) {
  if (alpha <= 0.0) throw Error(ErrorKind::Argument, "blend_transform: alpha must be positive");
  if (sigma_w <= 0.0)
    throw Error(ErrorKind::Argument, "blend_transform: sigma_w must be positive");
  if (anchors.tree.size() != anchors.size())
    throw Error(ErrorKind::Argument, "blend_transform: anchor tree not built");

  Mat34 identity = Mat34::Zero();
  identity.block<3, 3>(0, 0).setIdentity();

  const std::vector<int> nn =
      anchors.tree.k_nearest(p, std::min<int>(n_neighbors, static_cast<int>(anchors.size())));
  double denom = alpha;
  std::vector<double> w(nn.size());
  for (size_t k = 0; k < nn.size(); ++k) {
    const double d2 = (p - anchors.v[nn[k]]).squaredNorm();
    w[k] = std::exp(-d2 / (2.0 * sigma_w * sigma_w));
    denom += w[k];
  }

  Mat34 sum = alpha * identity;
  for (size_t k = 0; k < nn.size(); ++k) sum += w[k] * anchors.T[nn[k]];

  if (coefs) {
    coefs->alpha_coef = alpha / denom;
    coefs->anchors.clear();
    for (size_t k = 0; k < nn.size(); ++k) coefs->anchors.emplace_back(nn[k], w[k] / denom);
  }
  return sum / denom;
}

StrandSet deform_hairstyle(const Hairstyle& style, const AnchorTransforms& anchors,
                           double alpha, double sigma_w, int n_neighbors) {
  StrandSet out;
  out.source_tag = style.id;
  out.strands.reserve(style.strands.strands.size());
  for (const Strand& s : style.strands.strands) {
    Strand d;
    d.vertices.reserve(s.vertices.size());
    d.colors = s.colors;
    for (const Vec3& p : s.vertices) {
      const Mat34 t = blend_transform(p, anchors, alpha, sigma_w, n_neighbors);
      d.vertices.push_back(apply_transform(t, p));
    }
    d.recompute_tangents();
    out.strands.push_back(std::move(d));
  }
  return out;
}

std::string final_select(const std::vector<DeformedCandidate>& candidates,
                         const QueryStrands& query, double sample_spacing) {
  if (candidates.empty()) throw Error(ErrorKind::Argument, "final_select: no candidates");
  std::string best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const DeformedCandidate& cand : candidates) {
    const StyleIndex index = build_style_index(cand.strands, sample_spacing);
    const double dist = strand_set_distance(query.set, index);
    if (dist < best_dist || (dist == best_dist && cand.id < best)) {
      best_dist = dist;
      best = cand.id;
    }
  }
  return best;
}

}  // namespace hairrec
