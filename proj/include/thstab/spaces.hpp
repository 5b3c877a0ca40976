#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "thstab/geometry.hpp"
#include "thstab/mesh.hpp"

namespace thstab {

enum class QuadratureMode {
  GaussLobatto,        // (k+1)-point Gauss-Lobatto, volume minus facet terms
  ReferenceHighOrder,  // (2k+3)-point Gauss, divergence form -int q div v
};

const char* to_string(QuadratureMode mode);

struct AssemblyOptions {
  QuadratureMode quadrature = QuadratureMode::GaussLobatto;
  // Gauss-Lobatto mode only: include the facet integrals. Interior facet
  // contributions cancel globally and boundary ones vanish for v in H^1_0.
  bool facet_terms = true;
  // Use |v|_{H^1} instead of the full H^1 norm for the velocity metric.
  bool h1_seminorm = false;
};

/// Element matrices on the full local spaces Q_k(K)^d x Q_{k-1}(K).
/// Velocity dofs are ordered local node major: row = node * d + component.
struct ElementMatrices {
  Eigen::MatrixXd b;
  Eigen::MatrixXd vel_mass;
  Eigen::MatrixXd vel_stiffness;
  Eigen::MatrixXd pr_mass;
  Eigen::MatrixXd pr_stiffness;
};

/// b_K(phi, psi) for all local basis pairs. Does not check the integrand
/// condition, so it can be used to expose its failure.
Eigen::MatrixXd element_b(const GeometryMap<double>& G, int k, QuadratureMode mode, bool facet_terms = true);

/// Velocity/pressure mass and stiffness Grams by (2k+3)-point Gauss.
ElementMatrices element_matrices(const GeometryMap<double>& G, int k, QuadratureMode mode,
                                 bool facet_terms = true);

/// Assembled Taylor-Hood system: V_h = continuous Q_k^d vanishing on the
/// boundary, Q_h = continuous Q_{k-1} (no mean-value constraint).
struct FemSystem {
  int dim = 0;
  int k = 0;
  AssemblyOptions options;
  GlobalNodeTable velocity_nodes;
  GlobalNodeTable pressure_nodes;
  std::vector<Index> velocity_slot;  // per velocity node; -1 on the boundary
  std::vector<double> element_h;

  Eigen::MatrixXd b;           // b(phi_i, psi_j), velocity x pressure
  Eigen::MatrixXd vel_h1;      // full H^1 Gram (or |.|_1 if h1_seminorm)
  Eigen::MatrixXd vel_l2;
  Eigen::MatrixXd vel_grad;
  Eigen::MatrixXd pr_l2;
  Eigen::MatrixXd pr_grad;
  Eigen::MatrixXd pr_meshdep;  // sum_K h_K^2 (grad, grad)_K
  Eigen::VectorXd pr_ones;

  Index num_velocity_dofs() const { return b.rows(); }
  Index num_pressure_dofs() const { return b.cols(); }

  /// Global velocity dof of (node, component); -1 on the boundary.
  Index velocity_dof(Index node, int component) const {
    const Index slot = velocity_slot[node];
    return slot < 0 ? -1 : slot * dim + component;
  }

  /// Global dof (or -1) for every local velocity dof of element e.
  std::vector<Index> element_velocity_dofs(Index e) const;
  const std::vector<Index>& element_pressure_dofs(Index e) const { return pressure_nodes.local_to_global[e]; }
};

/// Throws ConditionViolation when Gauss-Lobatto assembly is requested on a
/// mesh with non-affine 3D elements.
FemSystem assemble(const Mesh& mesh, int k, const AssemblyOptions& options = {});

enum class NormKind { VelocityH1, VelocityL2, PressureL2, PressureGrad, PressureMeshDependent };

const Eigen::MatrixXd& gram(const FemSystem& sys, NormKind which);

double norm(const FemSystem& sys, NormKind which, const Eigen::VectorXd& x);

/// v^T B q.
double apply_b(const FemSystem& sys, const Eigen::VectorXd& v, const Eigen::VectorXd& q);

Eigen::VectorXd interpolate_pressure(const FemSystem& sys,
                                     const std::function<double(const Point<double>&)>& f);

Eigen::VectorXd interpolate_velocity(const FemSystem& sys,
                                     const std::function<Point<double>(const Point<double>&)>& f);

/// Element-local pair V_K x Q_K: velocity dofs on the physical boundary
/// are dropped, pressure keeps all local nodes (constants included).
struct LocalSpaces {
  Eigen::MatrixXd b;  // full b_K, facet terms included
  Eigen::MatrixXd vel_h1;
  Eigen::MatrixXd vel_l2;
  Eigen::MatrixXd pr_l2;
  Eigen::MatrixXd pr_grad;
  double h = 0.0;
  std::vector<Index> kept;  // local velocity dofs retained
};

LocalSpaces local_spaces(const Mesh& mesh, const FemSystem& sys, Index e);

}  // namespace thstab
