#pragma once

#include <vector>

#include <Eigen/Core>

#include "thstab/tensor_poly.hpp"
#include "thstab/types.hpp"

namespace thstab {

/// Values (n) and reference gradients (dim x n) of the tensor nodal basis
/// built from `basis` on every axis, at x.
struct BasisTable {
  Eigen::VectorXd values;
  Eigen::MatrixXd grads;
};

inline BasisTable tabulate(const LagrangeBasis1D<double>& basis, int dim, const Point<double>& x) {
  const int n1 = basis.size();
  std::vector<Eigen::VectorXd> v(dim), dv(dim);
  for (int i = 0; i < dim; ++i) {
    v[i] = basis.values(x[i]);
    dv[i] = basis.derivatives(x[i]);
  }
  const Index n = tensor_size(n1, dim);
  BasisTable t{Eigen::VectorXd(n), Eigen::MatrixXd(dim, n)};
  for (Index a = 0; a < n; ++a) {
    const MultiIndex j = unflatten(a, n1, dim);
    double value = 1.0;
    for (int i = 0; i < dim; ++i) value *= v[i][j[i]];
    t.values[a] = value;
    for (int i = 0; i < dim; ++i) {
      double g = dv[i][j[i]];
      for (int l = 0; l < dim; ++l)
        if (l != i) g *= v[l][j[l]];
      t.grads(i, a) = g;
    }
  }
  return t;
}

/// Velocity (Q_k on k+1 Gauss-Lobatto points per axis) and pressure
/// (Q_{k-1} on k points per axis) bases on [0,1]^dim.
struct TaylorHoodReference {
  int dim;
  int k;
  LagrangeBasis1D<double> velocity;
  LagrangeBasis1D<double> pressure;

  TaylorHoodReference(int dim_, int k_)
      : dim(dim_),
        k(k_),
        velocity(LagrangeBasis1D<double>::gauss_lobatto(k_)),
        pressure(LagrangeBasis1D<double>::gauss_lobatto(k_ - 1)) {}

  Index velocity_nodes() const { return tensor_size(k + 1, dim); }
  Index pressure_nodes() const { return tensor_size(k, dim); }
};

}  // namespace thstab
