#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "thstab/error.hpp"
#include "thstab/gauss_lobatto.hpp"
#include "thstab/random.hpp"
#include "thstab/types.hpp"

namespace thstab {

/// Nodal Lagrange basis on distinct nodes in [0,1], barycentric form.
template <typename Scalar = double>
class LagrangeBasis1D {
 public:
  explicit LagrangeBasis1D(std::vector<Scalar> nodes) : nodes_(std::move(nodes)) {
    const std::size_t n = nodes_.size();
    if (n == 0) throw Error(ErrorKind::InvalidArgument, "Lagrange basis needs at least one node");
    weights_.assign(n, Scalar(1));
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t m = 0; m < n; ++m) {
        if (m == j) continue;
        const Scalar diff = nodes_[j] - nodes_[m];
        if (diff == Scalar(0)) throw Error(ErrorKind::InvalidArgument, "Lagrange nodes must be distinct");
        weights_[j] /= diff;
      }
    }
  }

  /// Basis of degree `degree` on the (degree+1)-point Gauss-Lobatto grid.
  /// Degree 0 uses the single node 1/2.
  static LagrangeBasis1D gauss_lobatto(int degree) {
    if (degree < 0) throw Error(ErrorKind::InvalidArgument, "negative polynomial degree");
    if (degree == 0) return LagrangeBasis1D(std::vector<Scalar>{Scalar(1) / Scalar(2)});
    return LagrangeBasis1D(gauss_lobatto_rule<Scalar>(degree + 1).points);
  }

  int size() const { return static_cast<int>(nodes_.size()); }
  int degree() const { return size() - 1; }
  const std::vector<Scalar>& nodes() const { return nodes_; }
  const std::vector<Scalar>& barycentric_weights() const { return weights_; }

  Vector<Scalar> values(Scalar t) const {
    const int n = size();
    Vector<Scalar> phi(n);
    for (int j = 0; j < n; ++j) {
      if (t == nodes_[j]) {
        phi.setZero();
        phi[j] = Scalar(1);
        return phi;
      }
    }
    Scalar denom(0);
    for (int j = 0; j < n; ++j) {
      phi[j] = weights_[j] / (t - nodes_[j]);
      denom += phi[j];
    }
    return phi / denom;
  }

  // Product form w_j * sum_{m != j} prod_{l != j,m} (t - x_l); no division by
  // (t - x_j), so it is stable at and near the nodes.
  Vector<Scalar> derivatives(Scalar t) const {
    const int n = size();
    Vector<Scalar> dphi = Vector<Scalar>::Zero(n);
    for (int j = 0; j < n; ++j) {
      Scalar sum(0);
      for (int m = 0; m < n; ++m) {
        if (m == j) continue;
        Scalar prod(1);
        for (int l = 0; l < n; ++l) {
          if (l == j || l == m) continue;
          prod *= t - nodes_[l];
        }
        sum += prod;
      }
      dphi[j] = weights_[j] * sum;
    }
    return dphi;
  }

 private:
  std::vector<Scalar> nodes_;
  std::vector<Scalar> weights_;
};

/// Index helpers for tensor grids with per-axis sizes.
struct TensorShape {
  std::vector<int> sizes;

  int dim() const { return static_cast<int>(sizes.size()); }

  Index size() const {
    Index s = 1;
    for (int n : sizes) s *= n;
    return s;
  }

  MultiIndex multi_index(Index flat) const {
    MultiIndex j{0, 0, 0};
    for (int i = 0; i < dim(); ++i) {
      j[i] = static_cast<int>(flat % sizes[i]);
      flat /= sizes[i];
    }
    return j;
  }
};

/// Element of P_{k_1..k_d}([0,1]^d) stored by its values on the tensor
/// Gauss-Lobatto grid of per-axis size k_i + 1.
template <typename Scalar = double>
class TensorPolynomial {
 public:
  TensorPolynomial(std::vector<int> degrees, Vector<Scalar> coefficients)
      : degrees_(std::move(degrees)), coefficients_(std::move(coefficients)) {
    if (degrees_.empty() || degrees_.size() > 3) {
      throw Error(ErrorKind::InvalidArgument, "tensor polynomial dimension must be 1, 2 or 3");
    }
    for (int k : degrees_) {
      bases_.push_back(LagrangeBasis1D<Scalar>::gauss_lobatto(k));
      shape_.sizes.push_back(k + 1);
    }
    if (coefficients_.size() != shape_.size()) {
      throw Error(ErrorKind::InvalidArgument, "coefficient count does not match the tensor grid");
    }
  }

  template <typename F>
  static TensorPolynomial interpolate(F&& f, std::vector<int> degrees) {
    TensorPolynomial p(degrees, Vector<Scalar>::Zero(grid_size(degrees)));
    for (Index a = 0; a < p.coefficients_.size(); ++a) p.coefficients_[a] = f(p.node(a));
    return p;
  }

  int dim() const { return static_cast<int>(degrees_.size()); }
  const std::vector<int>& degrees() const { return degrees_; }
  const Vector<Scalar>& coefficients() const { return coefficients_; }
  const TensorShape& shape() const { return shape_; }
  const LagrangeBasis1D<Scalar>& basis(int axis) const { return bases_[axis]; }

  Point<Scalar> node(Index flat) const {
    const MultiIndex j = shape_.multi_index(flat);
    Point<Scalar> x(dim());
    for (int i = 0; i < dim(); ++i) x[i] = bases_[i].nodes()[j[i]];
    return x;
  }

  Scalar operator()(const Point<Scalar>& x) const { return contract(x, -1); }

  Point<Scalar> gradient(const Point<Scalar>& x) const {
    Point<Scalar> g(dim());
    for (int i = 0; i < dim(); ++i) g[i] = contract(x, i);
    return g;
  }

 private:
  static Index grid_size(const std::vector<int>& degrees) {
    Index s = 1;
    for (int k : degrees) s *= k + 1;
    return s;
  }

  // Sum of coefficients times tensor basis values; `diff_axis` selects one
  // axis whose factor is differentiated (-1: none).
  Scalar contract(const Point<Scalar>& x, int diff_axis) const {
    std::vector<Vector<Scalar>> factors;
    factors.reserve(dim());
    for (int i = 0; i < dim(); ++i) {
      factors.push_back(i == diff_axis ? bases_[i].derivatives(x[i]) : bases_[i].values(x[i]));
    }
    Scalar sum(0);
    for (Index a = 0; a < coefficients_.size(); ++a) {
      const MultiIndex j = shape_.multi_index(a);
      Scalar prod = coefficients_[a];
      for (int i = 0; i < dim(); ++i) prod *= factors[i][j[i]];
      sum += prod;
    }
    return sum;
  }

  std::vector<int> degrees_;
  Vector<Scalar> coefficients_;
  std::vector<LagrangeBasis1D<Scalar>> bases_;
  TensorShape shape_;
};

template <typename Scalar>
Scalar eval(const TensorPolynomial<Scalar>& p, const Point<Scalar>& x) {
  return p(x);
}

template <typename Scalar>
Point<Scalar> grad(const TensorPolynomial<Scalar>& p, const Point<Scalar>& x) {
  return p.gradient(x);
}

inline constexpr int kMembershipSamples = 200;
inline constexpr std::uint64_t kMembershipSeed = 0x5eedULL;
inline constexpr double kMembershipTolerance = 1e-10;

/// Tests f in P_{m_1..m_d} by interpolating on the (m_i+1)-point grid and
/// comparing at seeded pseudo-random points. The sample-evaluation matrix
/// is precomputed, so one tester can check many functions cheaply.
template <typename Scalar = double>
class DegreeTester {
 public:
  explicit DegreeTester(std::vector<int> degrees, int samples = kMembershipSamples,
                        std::uint64_t seed = kMembershipSeed)
      : degrees_(std::move(degrees)) {
    if (degrees_.empty() || degrees_.size() > 3) {
      throw Error(ErrorKind::InvalidArgument, "degree tester dimension must be 1, 2 or 3");
    }
    std::vector<LagrangeBasis1D<Scalar>> bases;
    for (int m : degrees_) {
      bases.push_back(LagrangeBasis1D<Scalar>::gauss_lobatto(m));
      shape_.sizes.push_back(m + 1);
    }
    const int d = dim();
    for (Index a = 0; a < shape_.size(); ++a) {
      const MultiIndex j = shape_.multi_index(a);
      Point<Scalar> x(d);
      for (int i = 0; i < d; ++i) x[i] = bases[i].nodes()[j[i]];
      grid_.push_back(x);
    }
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
      Point<Scalar> x(d);
      for (int i = 0; i < d; ++i) x[i] = Scalar(rng.uniform());
      samples_.push_back(x);
    }
    eval_.resize(samples, shape_.size());
    for (int s = 0; s < samples; ++s) {
      std::vector<Vector<Scalar>> factors;
      for (int i = 0; i < d; ++i) factors.push_back(bases[i].values(samples_[s][i]));
      for (Index a = 0; a < shape_.size(); ++a) {
        const MultiIndex j = shape_.multi_index(a);
        Scalar prod(1);
        for (int i = 0; i < d; ++i) prod *= factors[i][j[i]];
        eval_(s, a) = prod;
      }
    }
  }

  int dim() const { return static_cast<int>(degrees_.size()); }
  const std::vector<int>& degrees() const { return degrees_; }
  const std::vector<Point<Scalar>>& grid_points() const { return grid_; }
  const std::vector<Point<Scalar>>& sample_points() const { return samples_; }

  /// max |interpolant - f| / (1 + max |f|) over the sample points.
  Scalar residual(const Vector<Scalar>& grid_values, const Vector<Scalar>& sample_values) const {
    using std::max;
    const Vector<Scalar> interp = eval_ * grid_values;
    const Scalar scale = max(grid_values.cwiseAbs().maxCoeff(), sample_values.cwiseAbs().maxCoeff());
    return (interp - sample_values).cwiseAbs().maxCoeff() / (Scalar(1) + scale);
  }

  bool contains(const Vector<Scalar>& grid_values, const Vector<Scalar>& sample_values,
                Scalar tol = Scalar(kMembershipTolerance)) const {
    return residual(grid_values, sample_values) <= tol;
  }

  template <typename F>
  bool contains(F&& f, Scalar tol = Scalar(kMembershipTolerance)) const {
    Vector<Scalar> g(static_cast<Index>(grid_.size()));
    Vector<Scalar> s(static_cast<Index>(samples_.size()));
    for (std::size_t a = 0; a < grid_.size(); ++a) g[static_cast<Index>(a)] = f(grid_[a]);
    for (std::size_t a = 0; a < samples_.size(); ++a) s[static_cast<Index>(a)] = f(samples_[a]);
    return contains(g, s, tol);
  }

 private:
  std::vector<int> degrees_;
  TensorShape shape_;
  std::vector<Point<Scalar>> grid_;
  std::vector<Point<Scalar>> samples_;
  Matrix<Scalar> eval_;
};

/// True iff f agrees with its P_{m_1..m_d} interpolant at 200 seeded points
/// within tol * (1 + max|f|).
template <typename Scalar = double, typename F>
bool degree_membership(F&& f, const std::vector<int>& degrees,
                       Scalar tol = Scalar(kMembershipTolerance),
                       std::uint64_t seed = kMembershipSeed) {
  return DegreeTester<Scalar>(degrees, kMembershipSamples, seed).contains(std::forward<F>(f), tol);
}

}  // namespace thstab
