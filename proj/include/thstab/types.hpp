#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Core>

namespace thstab {

using Index = Eigen::Index;

/// Point or small vector in R^d, d <= 3, without heap allocation.
template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;

/// d x d matrix, d <= 3.
template <typename Scalar>
using SmallMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using MultiIndex = std::array<int, 3>;

// Tensor-product index helpers. The first axis runs fastest.

inline Index tensor_size(int n, int dim) {
  Index size = 1;
  for (int i = 0; i < dim; ++i) size *= n;
  return size;
}

inline MultiIndex unflatten(Index flat, int n, int dim) {
  MultiIndex j{0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    j[i] = static_cast<int>(flat % n);
    flat /= n;
  }
  return j;
}

inline Index flatten(const MultiIndex& j, int n, int dim) {
  Index flat = 0;
  for (int i = dim - 1; i >= 0; --i) flat = flat * n + j[i];
  return flat;
}

}  // namespace thstab
