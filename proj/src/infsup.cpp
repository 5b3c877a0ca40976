#include "thstab/infsup.hpp"

#include <cmath>

#include "thstab/eigensolve.hpp"
#include "thstab/error.hpp"
#include "thstab/reference_element.hpp"

namespace thstab {

InfSupResult ratio_constant(const Eigen::MatrixXd& S, const Eigen::MatrixXd& G, const Eigen::MatrixXd& mass) {
  const Index n = S.rows();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const GeneralizedEigen eig = sym_gen_eig(S, G, ones);
  const SpectrumSummary s = summarize_spectrum(eig.values);
  InfSupResult r;
  r.kernel_dim = s.kernel_dim + 1;
  r.max_eigenvalue = s.max;
  if (s.min_positive_index < 0) return r;
  r.eigenvalue = s.min_positive;
  r.value = std::sqrt(s.min_positive);
  Eigen::VectorXd q = eig.vectors.col(s.min_positive_index);
  q -= (ones.dot(mass * q) / ones.dot(mass * ones)) * ones;
  const double gnorm = std::sqrt(std::max(0.0, q.dot(G * q)));
  if (gnorm > 0) q /= gnorm;
  Index big = 0;
  q.cwiseAbs().maxCoeff(&big);
  if (q[big] < 0) q = -q;
  r.mode = q;
  return r;
}

namespace {

void require_velocity(Index n) {
  if (n == 0) throw Error(ErrorKind::UnsupportedMesh, "no interior velocity dofs: the inf-sup quotient is undefined");
}

}  // namespace

InfSupResult infsup_classical(const FemSystem& sys) {
  require_velocity(sys.num_velocity_dofs());
  return ratio_constant(schur_complement(sys.b, sys.vel_h1), sys.pr_l2, sys.pr_l2);
}

InfSupResult infsup_bp(const FemSystem& sys) {
  require_velocity(sys.num_velocity_dofs());
  return ratio_constant(schur_complement(sys.b, sys.vel_l2), sys.pr_grad, sys.pr_l2);
}

InfSupResult infsup_meshdep(const FemSystem& sys) {
  require_velocity(sys.num_velocity_dofs());
  return ratio_constant(schur_complement(sys.b, sys.vel_h1), sys.pr_meshdep, sys.pr_l2);
}

InfSupResult infsup_local(const Mesh& mesh, const FemSystem& sys, Index e, LocalNormPair pair) {
  const LocalSpaces loc = local_spaces(mesh, sys, e);
  require_velocity(static_cast<Index>(loc.kept.size()));
  if (pair == LocalNormPair::H1MeshGrad) {
    return ratio_constant(schur_complement(loc.b, loc.vel_h1), loc.h * loc.h * loc.pr_grad, loc.pr_l2);
  }
  return ratio_constant(schur_complement(loc.b, loc.vel_l2), loc.pr_grad, loc.pr_l2);
}

FaceConfig three_adjacent_interior(int dim) {
  FaceConfig c{};
  for (int i = 0; i < dim; ++i) c[2 * i] = true;
  return c;
}

FaceConfig all_faces_interior(int dim) {
  FaceConfig c{};
  for (int f = 0; f < 2 * dim; ++f) c[f] = true;
  return c;
}

SeminormPair seminorm_matrices(int k, int dim, const FaceConfig& config) {
  if (dim < 2 || dim > 3) throw Error(ErrorKind::InvalidArgument, "dimension must be 2 or 3");
  for (int i = 0; i < dim; ++i) {
    if (!config[2 * i] && !config[2 * i + 1]) {
      throw Error(ErrorKind::UnsupportedMesh,
                  "face configuration needs an interior facet in every axis direction");
    }
  }
  const TaylorHoodReference ref(dim, k);
  const Index np = ref.pressure_nodes();
  SeminormPair s{Eigen::MatrixXd::Zero(np, np), Eigen::MatrixXd::Zero(np, np)};
  for (Index l = 0; l < ref.velocity_nodes(); ++l) {
    const MultiIndex j = unflatten(l, k + 1, dim);
    Point<double> x(dim);
    bool excluded = false;
    for (int i = 0; i < dim; ++i) {
      x[i] = ref.velocity.nodes()[j[i]];
      excluded = excluded || (j[i] == 0 && !config[2 * i]) || (j[i] == k && !config[2 * i + 1]);
    }
    const Eigen::MatrixXd g = tabulate(ref.pressure, dim, x).grads;
    s.second.noalias() += g.transpose() * g;
    if (excluded) continue;
    const LocalNodeInfo info = classify_node(j, k, dim);
    for (int i = 0; i < dim; ++i)
      if (info.free_axes & (1u << i)) s.first.noalias() += g.row(i).transpose() * g.row(i);
  }
  return s;
}

SeminormReport seminorm_equivalence(int k, int dim, const FaceConfig& config) {
  const SeminormPair s = seminorm_matrices(k, dim, config);
  SeminormReport r;
  r.kernel_dim = summarize_spectrum(jacobi_eigen(s.first).values).kernel_dim;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(s.first.rows());
  const SpectrumSummary sum = summarize_spectrum(sym_gen_eig(s.first, s.second, ones).values);
  r.lambda_min_positive = sum.min_positive;
  r.lambda_max = sum.max;
  return r;
}

}  // namespace thstab
