#include "hairrec/registration.hpp"

#include "hairrec/kdtree.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <set>

namespace hairrec {

RegistrationResult register_mesh(const TriangleMesh& source, const TriangleMesh& target,
                                 const RegistrationParams& params) {
  if (source.vertices.empty() || target.vertices.empty())
    throw Error(ErrorKind::Argument, "register_mesh: empty mesh");
  const int n = static_cast<int>(source.vertices.size());

  // Work in normalized coordinates so the stiffness schedule is scale-free.
  const Aabb sbox = source.bounds();
  const Vec3 center = sbox.center();
  const double scale = sbox.diagonal() > 0.0 ? 1.0 / sbox.diagonal() : 1.0;
  std::vector<Vec3> src(n);
  for (int i = 0; i < n; ++i) src[i] = scale * (source.vertices[i] - center);
  std::vector<Vec3> tgt(target.vertices.size());
  for (size_t i = 0; i < target.vertices.size(); ++i)
    tgt[i] = scale * (target.vertices[i] - center);
  const KdTree3 tgt_tree(tgt);

  std::set<std::pair<int, int>> edges;
  for (const auto& f : source.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = f[k], b = f[(k + 1) % 3];
      edges.emplace(std::min(a, b), std::max(a, b));
    }
  }

  using Sparse = Eigen::SparseMatrix<double>;
  using Triplet = Eigen::Triplet<double>;

  // Unknowns X (4n x 3): vertex i maps to X.block(4i, 0, 4, 3)^T * [v_i; 1].
  // Stiffness normal matrix: graph-Laplacian structure over 4x4 blocks.
  std::vector<Triplet> kt;
  for (const auto& [a, b] : edges) {
    for (int r = 0; r < 4; ++r) {
      kt.emplace_back(4 * a + r, 4 * a + r, 1.0);
      kt.emplace_back(4 * b + r, 4 * b + r, 1.0);
      kt.emplace_back(4 * a + r, 4 * b + r, -1.0);
      kt.emplace_back(4 * b + r, 4 * a + r, -1.0);
    }
  }
  Sparse K(4 * n, 4 * n);
  K.setFromTriplets(kt.begin(), kt.end());

  // Data normal matrix: block-diagonal h_i h_i^T with h_i = [v_i; 1].
  std::vector<Triplet> dt;
  for (int i = 0; i < n; ++i) {
    Eigen::Vector4d h(src[i].x(), src[i].y(), src[i].z(), 1.0);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) dt.emplace_back(4 * i + r, 4 * i + c, h(r) * h(c));
  }
  Sparse DtD(4 * n, 4 * n);
  DtD.setFromTriplets(dt.begin(), dt.end());

  Eigen::MatrixXd X(4 * n, 3);
  for (int i = 0; i < n; ++i) {
    X.block<4, 3>(4 * i, 0).setZero();
    X.block<3, 3>(4 * i, 0).setIdentity();
  }

  auto transformed = [&](int i) -> Vec3 {
    const Eigen::Vector4d h(src[i].x(), src[i].y(), src[i].z(), 1.0);
    return X.block<4, 3>(4 * i, 0).transpose() * h;
  };
  auto mean_closest = [&]() {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = 0.0;
      tgt_tree.nearest(transformed(i), &d);
      sum += d;
    }
    return sum / n;
  };

  Eigen::SimplicialLDLT<Sparse> solver;
  double prev_level_residual = std::numeric_limits<double>::infinity();
  int rising_levels = 0;

  for (const double alpha : params.stiffness) {
    const Sparse A = (alpha * alpha) * K + DtD;
    solver.compute(A);
    if (solver.info() != Eigen::Success)
      throw Error(ErrorKind::RegistrationFailure, "register_mesh: singular system");

    for (int it = 0; it < params.max_inner_iterations; ++it) {
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(4 * n, 3);
      for (int i = 0; i < n; ++i) {
        const Eigen::Vector4d h(src[i].x(), src[i].y(), src[i].z(), 1.0);
        const int j = tgt_tree.nearest(transformed(i));
        rhs.block<4, 3>(4 * i, 0) = h * tgt[j].transpose();
      }
      const Eigen::MatrixXd next = solver.solve(rhs);
      const double change = (next - X).cwiseAbs().rowwise().sum().mean();
      X = next;
      if (change < params.inner_tolerance) break;
    }

    const double residual = mean_closest();
    rising_levels = residual > prev_level_residual ? rising_levels + 1 : 0;
    if (rising_levels >= 3)
      throw Error(ErrorKind::RegistrationFailure,
                  "register_mesh: residual grew over three stiffness levels (insufficient "
                  "overlap between source and target)");
    prev_level_residual = residual;
  }

  RegistrationResult result;
  result.targets.resize(n);
  for (int i = 0; i < n; ++i) result.targets[i] = transformed(i) / scale + center;
  result.mean_residual = prev_level_residual / scale;
  return result;
}

}  // namespace hairrec
