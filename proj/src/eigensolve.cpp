#include "thstab/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "thstab/error.hpp"

namespace thstab {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& A) {
  double sum = 0.0;
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i < A.rows(); ++i)
      if (i != j) sum += A(i, j) * A(i, j);
  return std::sqrt(sum);
}

}  // namespace

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& input, double rel_tol, int max_sweeps) {
  if (input.rows() != input.cols()) throw Error(ErrorKind::InvalidArgument, "jacobi_eigen needs a square matrix");
  const Index n = input.rows();
  Eigen::MatrixXd A = 0.5 * (input + input.transpose());
  Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
  const double target = rel_tol * A.norm();
  int sweep = 0;
  while (off_diagonal_norm(A) > target) {
    if (sweep == max_sweeps) {
      throw Error(ErrorKind::Numerical, "Jacobi eigen iteration did not converge in " +
                                            std::to_string(max_sweeps) + " sweeps");
    }
    ++sweep;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        A(p, q) = 0.0;
        A(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return A(a, a) < A(b, b); });
  SymmetricEigen result{Eigen::VectorXd(n), Eigen::MatrixXd(n, n), sweep};
  for (Index i = 0; i < n; ++i) {
    result.values[i] = A(order[i], order[i]);
    result.vectors.col(i) = V.col(order[i]);
  }
  return result;
}

GeneralizedEigen sym_gen_eig(const Eigen::MatrixXd& S, const Eigen::MatrixXd& G, const Eigen::MatrixXd& deflation) {
  const Index n = S.rows();
  if (S.cols() != n || G.rows() != n || G.cols() != n) {
    throw Error(ErrorKind::InvalidArgument, "sym_gen_eig: S and G must be square of equal size");
  }
  Eigen::MatrixXd Z;
  if (deflation.size() == 0) {
    Z = Eigen::MatrixXd::Identity(n, n);
  } else {
    if (deflation.rows() != n) throw Error(ErrorKind::InvalidArgument, "deflation basis has wrong length");
    const Index r = deflation.cols();
    const Eigen::MatrixXd GD = G * deflation;
    const bool annihilated = GD.norm() <= 1e-10 * G.norm() * deflation.norm();
    const Eigen::MatrixXd constraint_t = annihilated ? deflation : GD;  // n x r
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(constraint_t);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
    Z = Q.rightCols(n - r);
  }
  const Eigen::MatrixXd Gr = Z.transpose() * G * Z;
  const Eigen::MatrixXd Sr = Z.transpose() * S * Z;
  const Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (Gr + Gr.transpose()));
  const double diag_scale = Gr.diagonal().cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::Numerical, "metric matrix is not positive definite on the deflation complement");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  if (L.diagonal().cwiseAbs2().minCoeff() <= 1e-14 * diag_scale) {
    throw Error(ErrorKind::Numerical, "metric matrix is singular on the deflation complement");
  }
  const auto lower = L.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd Y = lower.solve(Sr);
  Eigen::MatrixXd C = lower.solve(Eigen::MatrixXd(Y.transpose()));
  C = 0.5 * (C + C.transpose());
  const SymmetricEigen eig = jacobi_eigen(C);
  const Eigen::MatrixXd back = L.transpose().triangularView<Eigen::Upper>().solve(eig.vectors);
  return {eig.values, Z * back};
}

SpectrumSummary summarize_spectrum(const Eigen::VectorXd& values, double kernel_rel) {
  SpectrumSummary s;
  if (values.size() == 0) return s;
  s.max = values.maxCoeff();
  const double threshold = kernel_rel * std::max(std::abs(s.max), std::numeric_limits<double>::min());
  for (Index i = 0; i < values.size(); ++i) {
    if (std::abs(values[i]) <= threshold) {
      ++s.kernel_dim;
    } else if (values[i] > threshold && s.min_positive_index < 0) {
      s.min_positive_index = i;
      s.min_positive = values[i];
    }
  }
  return s;
}

Eigen::MatrixXd schur_complement(const Eigen::MatrixXd& B, const Eigen::MatrixXd& A, SchurRoute route) {
  if (A.rows() != A.cols() || A.rows() != B.rows()) {
    throw Error(ErrorKind::InvalidArgument, "schur_complement: incompatible sizes");
  }
  if (route == SchurRoute::TriangularSolve) {
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "velocity Gram is not positive definite");
    const Eigen::MatrixXd X = llt.matrixL().solve(B);
    return X.transpose() * X;
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "velocity Gram factorization failed");
  const Eigen::MatrixXd S = B.transpose() * ldlt.solve(B);
  return 0.5 * (S + S.transpose());
}

}  // namespace thstab
