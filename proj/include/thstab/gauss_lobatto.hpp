#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "thstab/error.hpp"
#include "thstab/types.hpp"

namespace thstab {

/// Quadrature rule on [0,1] with strictly ascending points.
template <typename Scalar = double>
struct QuadratureRule1D {
  std::vector<Scalar> points;
  std::vector<Scalar> weights;

  int order() const { return static_cast<int>(points.size()); }

  template <typename F>
  Scalar integrate(F&& f) const {
    Scalar sum(0);
    for (std::size_t i = 0; i < points.size(); ++i) sum += weights[i] * f(points[i]);
    return sum;
  }
};

inline constexpr int kMaxLobattoPoints = 16;
inline constexpr int kMaxGaussPoints = 64;

namespace detail {

// (P_n(x), P_{n-1}(x)) by the three-term recurrence, n >= 1.
template <typename Scalar>
std::pair<Scalar, Scalar> legendre_pair(int n, Scalar x) {
  Scalar p_prev(1);
  Scalar p = x;
  for (int m = 2; m <= n; ++m) {
    const Scalar next = (Scalar(2 * m - 1) * x * p - Scalar(m - 1) * p_prev) / Scalar(m);
    p_prev = p;
    p = next;
  }
  return {p, p_prev};
}

template <typename Scalar>
Scalar newton_tolerance() {
  using std::max;
  return max(Scalar(1e-14), Scalar(64) * std::numeric_limits<Scalar>::epsilon());
}

// Maps a rule from [-1,1] to [0,1] and averages mirrored pairs so that the
// result is exactly symmetric about 1/2.
template <typename Scalar>
QuadratureRule1D<Scalar> to_unit_interval(std::vector<Scalar> x, std::vector<Scalar> w) {
  const std::size_t n = x.size();
  QuadratureRule1D<Scalar> rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rule.points[i] = (Scalar(1) + x[i]) / Scalar(2);
    rule.weights[i] = w[i] / Scalar(2);
  }
  for (std::size_t i = 0; i < n / 2; ++i) {
    const std::size_t j = n - 1 - i;
    const Scalar t = (rule.points[i] + (Scalar(1) - rule.points[j])) / Scalar(2);
    const Scalar wt = (rule.weights[i] + rule.weights[j]) / Scalar(2);
    rule.points[i] = t;
    rule.points[j] = Scalar(1) - t;
    rule.weights[i] = wt;
    rule.weights[j] = wt;
  }
  if (n % 2 == 1) rule.points[n / 2] = Scalar(1) / Scalar(2);
  return rule;
}

}  // namespace detail

/// n-point Gauss-Lobatto rule on [0,1], exact for polynomials of degree
/// 2n-3. Interior points are the roots of P'_{n-1}, found by Newton's
/// method from Chebyshev-Lobatto initial guesses.
template <typename Scalar = double>
QuadratureRule1D<Scalar> gauss_lobatto_rule(int n) {
  using std::abs;
  using std::cos;
  if (n < 2 || n > kMaxLobattoPoints) {
    throw Error(ErrorKind::InvalidArgument,
                "Gauss-Lobatto order must be in [2, " + std::to_string(kMaxLobattoPoints) +
                    "], got " + std::to_string(n));
  }
  const int degree = n - 1;
  const Scalar pi = std::numbers::pi_v<Scalar>;
  std::vector<Scalar> x(n), w(n);
  x.front() = Scalar(-1);
  x.back() = Scalar(1);
  for (int i = 1; i < degree; ++i) {
    Scalar xi = -cos(pi * Scalar(i) / Scalar(degree));
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, p_prev] = detail::legendre_pair(degree, xi);
      const Scalar one_minus_x2 = Scalar(1) - xi * xi;
      const Scalar dp = Scalar(degree) * (p_prev - xi * p) / one_minus_x2;
      const Scalar d2p = (Scalar(2) * xi * dp - Scalar(degree * (degree + 1)) * p) / one_minus_x2;
      const Scalar step = dp / d2p;
      xi -= step;
      if (abs(step) <= detail::newton_tolerance<Scalar>()) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw Error(ErrorKind::Numerical, "Gauss-Lobatto Newton iteration did not converge");
    }
    x[i] = xi;
  }
  for (int i = 0; i < n; ++i) {
    const Scalar p = detail::legendre_pair(degree, x[i]).first;
    w[i] = Scalar(2) / (Scalar(degree * (degree + 1)) * p * p);
  }
  return detail::to_unit_interval(std::move(x), std::move(w));
}

/// n-point Gauss-Legendre rule on [0,1], exact for degree 2n-1.
template <typename Scalar = double>
QuadratureRule1D<Scalar> gauss_legendre_rule(int n) {
  using std::abs;
  using std::cos;
  if (n < 1 || n > kMaxGaussPoints) {
    throw Error(ErrorKind::InvalidArgument,
                "Gauss-Legendre order must be in [1, " + std::to_string(kMaxGaussPoints) +
                    "], got " + std::to_string(n));
  }
  const Scalar pi = std::numbers::pi_v<Scalar>;
  std::vector<Scalar> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    // descending initial guesses, stored ascending
    Scalar xi = cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp(0);
    bool converged = false;
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, p_prev] = detail::legendre_pair(n, xi);
      dp = Scalar(n) * (p_prev - xi * p) / (Scalar(1) - xi * xi);
      const Scalar step = p / dp;
      xi -= step;
      if (abs(step) <= detail::newton_tolerance<Scalar>()) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw Error(ErrorKind::Numerical, "Gauss-Legendre Newton iteration did not converge");
    }
    const auto [p, p_prev] = detail::legendre_pair(n, xi);
    dp = Scalar(n) * (p_prev - xi * p) / (Scalar(1) - xi * xi);
    x[n - 1 - i] = xi;
    w[n - 1 - i] = Scalar(2) / ((Scalar(1) - xi * xi) * dp * dp);
  }
  return detail::to_unit_interval(std::move(x), std::move(w));
}

/// d-fold tensor product of a 1D rule on [0,1]^d.
template <typename Scalar = double>
class TensorQuadrature {
 public:
  TensorQuadrature(int dim, QuadratureRule1D<Scalar> rule)
      : dim_(dim), rule_(std::move(rule)) {
    if (dim < 1 || dim > 3) {
      throw Error(ErrorKind::InvalidArgument, "tensor quadrature dimension must be 1, 2 or 3");
    }
  }

  int dim() const { return dim_; }
  const QuadratureRule1D<Scalar>& rule1d() const { return rule_; }
  Index size() const { return tensor_size(rule_.order(), dim_); }

  MultiIndex multi_index(Index flat) const { return unflatten(flat, rule_.order(), dim_); }

  Point<Scalar> point(Index flat) const {
    const MultiIndex j = multi_index(flat);
    Point<Scalar> x(dim_);
    for (int i = 0; i < dim_; ++i) x[i] = rule_.points[j[i]];
    return x;
  }

  Scalar weight(Index flat) const {
    const MultiIndex j = multi_index(flat);
    Scalar w(1);
    for (int i = 0; i < dim_; ++i) w *= rule_.weights[j[i]];
    return w;
  }

 private:
  int dim_;
  QuadratureRule1D<Scalar> rule_;
};

template <typename Scalar = double>
TensorQuadrature<Scalar> gauss_lobatto_tensor(int n, int dim) {
  return TensorQuadrature<Scalar>(dim, gauss_lobatto_rule<Scalar>(n));
}

/// High-order Gauss-Legendre tensor rule used as the "exact" route.
template <typename Scalar = double>
TensorQuadrature<Scalar> reference_rule(int n, int dim) {
  return TensorQuadrature<Scalar>(dim, gauss_legendre_rule<Scalar>(n));
}

/// Sum of w_a f(a) over the tensor nodes; f takes a Point<Scalar>.
template <typename Scalar, typename F>
Scalar integrate_tensor(F&& f, const TensorQuadrature<Scalar>& rule) {
  Scalar sum(0);
  for (Index q = 0; q < rule.size(); ++q) sum += rule.weight(q) * f(rule.point(q));
  return sum;
}

}  // namespace thstab
