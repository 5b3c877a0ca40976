#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "thstab/error.hpp"
#include "thstab/types.hpp"

namespace thstab {

enum class MapKind { Bilinear2D, Trilinear3D, Affine3D };

inline int map_dimension(MapKind kind) { return kind == MapKind::Bilinear2D ? 2 : 3; }

inline int vertex_count(int dim) { return 1 << dim; }

/// Reference-cube corner of vertex p (0-based). Vertices 0..3 run
/// counterclockwise on the bottom x3 = 0, vertices 4..7 repeat them on top.
inline constexpr std::array<MultiIndex, 8> kCornerBits{{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1},
}};

/// Inverse of kCornerBits restricted to the first 2^dim vertices.
inline int corner_vertex(const MultiIndex& bits, int dim) {
  for (int p = 0; p < vertex_count(dim); ++p) {
    bool match = true;
    for (int i = 0; i < dim; ++i) match = match && kCornerBits[p][i] == bits[i];
    if (match) return p;
  }
  throw Error(ErrorKind::InvalidArgument, "corner bits out of range");
}

/// Cofactor matrix C_ij = (-1)^{i+j} M_ij by minor expansion.
template <typename Scalar>
SmallMatrix<Scalar> cofactor(const SmallMatrix<Scalar>& J) {
  const Index d = J.rows();
  SmallMatrix<Scalar> C(d, d);
  if (d == 1) {
    C(0, 0) = Scalar(1);
    return C;
  }
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      SmallMatrix<Scalar> minor(d - 1, d - 1);
      for (Index r = 0, mr = 0; r < d; ++r) {
        if (r == i) continue;
        for (Index c = 0, mc = 0; c < d; ++c) {
          if (c == j) continue;
          minor(mr, mc++) = J(r, c);
        }
        ++mr;
      }
      const Scalar m = d == 2 ? minor(0, 0) : minor.determinant();
      C(i, j) = ((i + j) % 2 == 0) ? m : -m;
    }
  }
  return C;
}

template <typename Scalar = double>
struct JacobianData {
  SmallMatrix<Scalar> J;
  Scalar det;
  SmallMatrix<Scalar> cof;

  auto column(Index i) const { return J.col(i); }
  auto cof_column(Index j) const { return cof.col(j); }
};

/// Multilinear (or affine) map from [0,1]^d onto an element, given by the
/// images of the reference vertices in kCornerBits order.
template <typename Scalar = double>
class GeometryMap {
 public:
  using VertexMatrix =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 8>;

  GeometryMap(MapKind kind, VertexMatrix vertices) : kind_(kind), vertices_(std::move(vertices)) {
    const int d = map_dimension(kind_);
    if (vertices_.rows() != d || vertices_.cols() != vertex_count(d)) {
      throw Error(ErrorKind::InvalidArgument, "geometry map needs 2^d vertices in R^d");
    }
    if (kind_ == MapKind::Affine3D) {
      if (!parallelepiped_consistent(vertices_, parallelepiped_tolerance())) {
        throw Error(ErrorKind::InvalidArgument, "affine 3D map requires parallelepiped vertices");
      }
      affine_J_.resize(3, 3);
      affine_J_.col(0) = vertices_.col(1) - vertices_.col(0);
      affine_J_.col(1) = vertices_.col(3) - vertices_.col(0);
      affine_J_.col(2) = vertices_.col(4) - vertices_.col(0);
    }
  }

  MapKind kind() const { return kind_; }
  int dim() const { return map_dimension(kind_); }
  const VertexMatrix& vertices() const { return vertices_; }
  Point<Scalar> vertex(int p) const { return vertices_.col(p); }

  Point<Scalar> map(const Point<Scalar>& x) const {
    if (kind_ == MapKind::Affine3D) return vertices_.col(0) + affine_J_ * x;
    Point<Scalar> y = Point<Scalar>::Zero(dim());
    for (int p = 0; p < vertex_count(dim()); ++p) y += corner_weight(p, x, -1) * vertices_.col(p);
    return y;
  }

  SmallMatrix<Scalar> jacobian_matrix(const Point<Scalar>& x) const {
    if (kind_ == MapKind::Affine3D) return affine_J_;
    const int d = dim();
    SmallMatrix<Scalar> J = SmallMatrix<Scalar>::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      for (int p = 0; p < vertex_count(d); ++p) J.col(i) += corner_weight(p, x, i) * vertices_.col(p);
    }
    return J;
  }

  /// J, |J| and cof(J) at x; throws DegenerateElement if |J| <= 0.
  JacobianData<Scalar> jacobian(const Point<Scalar>& x) const {
    JacobianData<Scalar> data{jacobian_matrix(x), Scalar(0), {}};
    data.det = data.J.determinant();
    if (!(data.det > Scalar(0))) {
      std::ostringstream msg;
      msg << "non-positive Jacobian determinant " << static_cast<double>(data.det) << " at (";
      for (Index i = 0; i < x.size(); ++i) msg << (i ? "," : "") << static_cast<double>(x[i]);
      msg << ")";
      throw Error(ErrorKind::DegenerateElement, msg.str());
    }
    data.cof = cofactor<Scalar>(data.J);
    return data;
  }

  /// Max distance between vertex images.
  Scalar diameter() const {
    using std::max;
    Scalar h(0);
    for (Index a = 0; a < vertices_.cols(); ++a)
      for (Index b = a + 1; b < vertices_.cols(); ++b)
        h = max(h, (vertices_.col(a) - vertices_.col(b)).norm());
    return h;
  }

  bool is_parallelepiped() const {
    return dim() == 3 && parallelepiped_consistent(vertices_, parallelepiped_tolerance());
  }

  /// a3 = a2 + a4 - a1 and the analogous relations for the other corners
  /// (1-based labels), within tol.
  static bool parallelepiped_consistent(const VertexMatrix& v, Scalar tol) {
    if (v.rows() != 3 || v.cols() != 8) return false;
    const auto e1 = v.col(1) - v.col(0);
    const auto e2 = v.col(3) - v.col(0);
    const auto e3 = v.col(4) - v.col(0);
    for (int p = 1; p < 8; ++p) {
      const MultiIndex& b = kCornerBits[p];
      const Point<Scalar> expected = v.col(0) + Scalar(b[0]) * e1 + Scalar(b[1]) * e2 + Scalar(b[2]) * e3;
      if ((v.col(p) - expected).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
  }

 private:
  Scalar parallelepiped_tolerance() const {
    using std::max;
    Scalar h(0);
    for (Index a = 1; a < vertices_.cols(); ++a) h = max(h, (vertices_.col(a) - vertices_.col(0)).norm());
    return Scalar(1e-12) * max(Scalar(1), h);
  }

  // Multilinear shape function of vertex p at x, differentiated along `axis`
  // when axis >= 0.
  Scalar corner_weight(int p, const Point<Scalar>& x, int axis) const {
    Scalar w(1);
    for (int i = 0; i < dim(); ++i) {
      const bool upper = kCornerBits[p][i] == 1;
      if (i == axis) {
        w *= upper ? Scalar(1) : Scalar(-1);
      } else {
        w *= upper ? x[i] : Scalar(1) - x[i];
      }
    }
    return w;
  }

  MapKind kind_;
  VertexMatrix vertices_;
  SmallMatrix<Scalar> affine_J_;
};

template <typename Scalar>
Point<Scalar> map_eval(const GeometryMap<Scalar>& G, const Point<Scalar>& x) {
  return G.map(x);
}

template <typename Scalar>
JacobianData<Scalar> jacobian(const GeometryMap<Scalar>& G, const Point<Scalar>& x) {
  return G.jacobian(x);
}

/// 2D cofactor by rotating the Jacobian columns:
/// cof(J) = ( -(J_2)^perp, (J_1)^perp ) with (a,b)^perp = (-b,a).
template <typename Scalar>
SmallMatrix<Scalar> cofactor_by_rotation(const SmallMatrix<Scalar>& J) {
  if (J.rows() != 2) throw Error(ErrorKind::InvalidArgument, "rotation form of the cofactor is 2D only");
  SmallMatrix<Scalar> C(2, 2);
  C(0, 0) = J(1, 1);
  C(1, 0) = -J(0, 1);
  C(0, 1) = -J(1, 0);
  C(1, 1) = J(0, 0);
  return C;
}

/// Cofactor columns (d2F x d3F, d3F x d1F, d1F x d2F) at x. 3D only.
template <typename Scalar>
std::array<Eigen::Matrix<Scalar, 3, 1>, 3> cof_columns_crossproduct(const GeometryMap<Scalar>& G,
                                                                   const Point<Scalar>& x) {
  if (G.dim() != 3) {
    throw Error(ErrorKind::InvalidArgument, "cross-product cofactor columns are defined in 3D only");
  }
  const SmallMatrix<Scalar> J = G.jacobian_matrix(x);
  const Eigen::Matrix<Scalar, 3, 1> d1 = J.col(0), d2 = J.col(1), d3 = J.col(2);
  return {d2.cross(d3), d3.cross(d1), d1.cross(d2)};
}

template <typename Scalar = double>
struct ShapeRegularity {
  Scalar h;
  Scalar min_det_ratio;  // min |J| / h^d
  Scalar max_det_ratio;
  Scalar min_singular;   // min sigma(J) / h
  Scalar max_singular;
};

inline constexpr int kShapeSamplesPerAxis = 5;

/// Sampled shape-regularity proxies on the equispaced 5^d grid. A sampled
/// check, not a certificate of positivity between samples.
template <typename Scalar>
ShapeRegularity<Scalar> shape_regularity_metrics(const GeometryMap<Scalar>& G) {
  using std::max;
  using std::min;
  using std::pow;
  const int d = G.dim();
  ShapeRegularity<Scalar> r{G.diameter(), std::numeric_limits<Scalar>::max(), Scalar(0),
                            std::numeric_limits<Scalar>::max(), Scalar(0)};
  const Scalar hd = pow(r.h, d);
  const int n = kShapeSamplesPerAxis;
  for (Index a = 0; a < tensor_size(n, d); ++a) {
    const MultiIndex j = unflatten(a, n, d);
    Point<Scalar> x(d);
    for (int i = 0; i < d; ++i) x[i] = Scalar(j[i]) / Scalar(n - 1);
    const JacobianData<Scalar> jd = G.jacobian(x);
    r.min_det_ratio = min(r.min_det_ratio, jd.det / hd);
    r.max_det_ratio = max(r.max_det_ratio, jd.det / hd);
    Eigen::JacobiSVD<Matrix<Scalar>> svd(Matrix<Scalar>(jd.J / r.h));
    r.min_singular = min(r.min_singular, svd.singularValues().minCoeff());
    r.max_singular = max(r.max_singular, svd.singularValues().maxCoeff());
  }
  return r;
}

}  // namespace thstab
