#pragma once

#include <Eigen/Core>

#include "thstab/types.hpp"

namespace thstab {

struct SymmetricEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
  int sweeps = 0;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is at most
/// rel_tol * ||A||_F. Throws Numerical after max_sweeps.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& A, double rel_tol = 1e-12, int max_sweeps = 100);

struct GeneralizedEigen {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // n x (n - r), G-orthonormal
};

/// S x = lambda G x on a complement of span(deflation). The complement is
/// G-orthogonal to the deflation vectors unless G annihilates them, in
/// which case the Euclidean complement is used (the quotient problem is
/// then independent of the choice). G must be definite on the complement.
GeneralizedEigen sym_gen_eig(const Eigen::MatrixXd& S, const Eigen::MatrixXd& G,
                             const Eigen::MatrixXd& deflation = Eigen::MatrixXd());

inline constexpr double kKernelThreshold = 1e-10;

struct SpectrumSummary {
  double min_positive = 0.0;
  Index min_positive_index = -1;
  double max = 0.0;
  Index kernel_dim = 0;
};

/// Eigenvalues below kernel_rel * lambda_max count as kernel.
SpectrumSummary summarize_spectrum(const Eigen::VectorXd& ascending, double kernel_rel = kKernelThreshold);

enum class SchurRoute {
  TriangularSolve,  // (L^{-1} B)^T (L^{-1} B) with A = L L^T
  FullSolve,        // B^T (A^{-1} B) by an LDL^T solve
};

/// B^T A^{-1} B for symmetric positive definite A.
Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& B, const Eigen::MatrixXd& A,
                                 SchurRoute route = SchurRoute::TriangularSolve);

}  // namespace thstab
