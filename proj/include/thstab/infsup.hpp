#pragma once

#include <array>

#include <Eigen/Core>

#include "thstab/mesh.hpp"
#include "thstab/spaces.hpp"

namespace thstab {

struct InfSupResult {
  double value = 0.0;       // sqrt of the smallest positive eigenvalue
  double eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
  Eigen::VectorXd mode;     // minimizer: zero mean, unit in the metric, largest entry positive
  Index kernel_dim = 0;     // pressure kernel including constants
};

/// Smallest positive eigenvalue of S q = lambda G q with the constants
/// deflated. `mass` defines the mean used to normalize the mode.
InfSupResult ratio_constant(const Eigen::MatrixXd& S, const Eigen::MatrixXd& G, const Eigen::MatrixXd& mass);

/// B^T A_H1^{-1} B against the L2 pressure mass.
InfSupResult infsup_classical(const FemSystem& sys);

/// B^T A_L2^{-1} B against the pressure gradient Gram.
InfSupResult infsup_bp(const FemSystem& sys);

/// B^T A_H1^{-1} B against sum_K h_K^2 (grad, grad)_K.
InfSupResult infsup_meshdep(const FemSystem& sys);

enum class LocalNormPair {
  H1MeshGrad,  // ||v||_H1 against h_K ||grad q||
  L2Grad,      // ||v||_L2 against ||grad q||
};

InfSupResult infsup_local(const Mesh& mesh, const FemSystem& sys, Index e, LocalNormPair pair);

/// Interior flag per reference facet 2 * axis + side.
using FaceConfig = std::array<bool, 6>;

/// Lower facets x_i = 0 interior, the rest on the boundary.
FaceConfig three_adjacent_interior(int dim);
FaceConfig all_faces_interior(int dim);

/// |q|_1^2 sums the free-axis squared derivatives over velocity nodes not
/// on a boundary facet; |q|_2^2 sums the full squared gradient over all
/// velocity nodes. Both on Q_{k-1} of the reference element.
struct SeminormPair {
  Eigen::MatrixXd first;
  Eigen::MatrixXd second;
};

/// Throws UnsupportedMesh unless every axis has an interior facet.
SeminormPair seminorm_matrices(int k, int dim, const FaceConfig& config);

struct SeminormReport {
  double lambda_min_positive = 0.0;
  double lambda_max = 0.0;
  Index kernel_dim = 0;  // of |.|_1 alone
};

SeminormReport seminorm_equivalence(int k, int dim, const FaceConfig& config);

}  // namespace thstab
