#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "thstab/mesh.hpp"
#include "thstab/spaces.hpp"

namespace thstab {

/// Local T_K on the reference element: rows are local velocity dofs
/// (node * d + component), columns local pressure nodes. Node l receives
/// sum over free axes i of J_i(a) d_i q(a); rows of excluded nodes are 0.
Eigen::MatrixXd element_t_matrix(const GeometryMap<double>& G, int k, const std::vector<bool>& excluded_nodes);

struct TOperator {
  Eigen::MatrixXd t;                            // velocity dofs x pressure dofs
  std::vector<Eigen::MatrixXd> element_blocks;  // T_K per element, full local rows
  double consistency_gap = 0.0;                 // max relative mismatch at shared nodes
};

/// Throws UnsupportedMesh if some element has no vertex with d interior
/// facets, ConditionViolation on non-affine 3D meshes, and Numerical if two
/// elements assign different values to a shared node.
TOperator build_t(const Mesh& mesh, const FemSystem& sys);

struct CoercivityReport {
  double c_t = 0.0;  // min positive eigenvalue of sym(T^T B) vs M_h
  double C_t = 0.0;  // sqrt of max eigenvalue of T^T A T vs M_h
  Index kernel_dim = 0;
  std::vector<double> element_c_t;
  std::vector<double> element_C_t;
};

CoercivityReport coercivity_check(const Mesh& mesh, const FemSystem& sys, const TOperator& T);

struct NormalTraceReport {
  double max_abs = 0.0;
  double scale = 0.0;  // max |v| |cof n| over the same nodes
};

/// Max |v . cof(J) n| over boundary Gauss-Lobatto nodes of every element,
/// for v = T applied to every pressure basis function.
NormalTraceReport normal_trace_check(const Mesh& mesh, const FemSystem& sys, const TOperator& T);

/// sum_a w_a |J(a)| sum_{i free} (d_i q(a))^2 over the non-excluded nodes.
double sum_of_squares(const GeometryMap<double>& G, int k, const std::vector<bool>& excluded_nodes,
                      const Eigen::VectorXd& q_local);

/// Max relative gap between b_K(T_K q, q) by high-order assembly and
/// sum_of_squares, over `samples` seeded random local q per element.
double sum_of_squares_gap(const Mesh& mesh, const FemSystem& sys, const TOperator& T, int samples,
                          std::uint64_t seed);

/// Nodes of element e that carry no velocity dofs.
std::vector<bool> excluded_velocity_nodes(const FemSystem& sys, Index e);

/// Per-node class and assigned vector of T q for debugging.
nlohmann::json t_audit(const Mesh& mesh, const FemSystem& sys, const TOperator& T, const Eigen::VectorXd& q);

}  // namespace thstab
