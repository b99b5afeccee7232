#pragma once

#include "hairrec/core.hpp"
#include "hairrec/mesh.hpp"

#include <vector>

namespace hairrec {

struct RegistrationParams {
  std::vector<double> stiffness = {50.0, 20.0, 10.0, 5.0, 2.0, 1.0};
  int max_inner_iterations = 10;
  double inner_tolerance = 1e-6;  // mean per-vertex change, normalized units
};

struct RegistrationResult {
  std::vector<Vec3> targets;    // registered position x_i per source vertex
  double mean_residual = 0.0;   // mean closest-point distance at the end
};

// Nonrigid registration of `source` onto `target`: per-vertex affine
// transforms, closest-point data term, edge-difference stiffness term, solved
// at a decreasing stiffness schedule. Deterministic. Throws
// RegistrationFailure when the mean closest-point distance grows over three
// consecutive stiffness levels.
RegistrationResult register_mesh(const TriangleMesh& source, const TriangleMesh& target,
                                 const RegistrationParams& params = {});

}  // namespace hairrec
