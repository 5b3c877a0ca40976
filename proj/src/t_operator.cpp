#include "thstab/t_operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thstab/eigensolve.hpp"
#include "thstab/error.hpp"
#include "thstab/gauss_lobatto.hpp"
#include "thstab/random.hpp"
#include "thstab/reference_element.hpp"

namespace thstab {

namespace {

Point<double> velocity_node(const TaylorHoodReference& ref, const MultiIndex& j) {
  Point<double> x(ref.dim);
  for (int i = 0; i < ref.dim; ++i) x[i] = ref.velocity.nodes()[j[i]];
  return x;
}

Eigen::MatrixXd restrict_rows(const Eigen::MatrixXd& M, const std::vector<Index>& rows) {
  Eigen::MatrixXd out(rows.size(), M.cols());
  for (std::size_t a = 0; a < rows.size(); ++a) out.row(a) = M.row(rows[a]);
  return out;
}

}  // namespace

std::vector<bool> excluded_velocity_nodes(const FemSystem& sys, Index e) {
  const auto& nodes = sys.velocity_nodes.local_to_global[e];
  std::vector<bool> excluded(nodes.size());
  for (std::size_t l = 0; l < nodes.size(); ++l) excluded[l] = sys.velocity_slot[nodes[l]] < 0;
  return excluded;
}

Eigen::MatrixXd element_t_matrix(const GeometryMap<double>& G, int k, const std::vector<bool>& excluded) {
  const int d = G.dim();
  const TaylorHoodReference ref(d, k);
  const Index nv = ref.velocity_nodes();
  if (static_cast<Index>(excluded.size()) != nv) {
    throw Error(ErrorKind::InvalidArgument, "excluded-node mask has the wrong length");
  }
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(d * nv, ref.pressure_nodes());
  for (Index l = 0; l < nv; ++l) {
    if (excluded[l]) continue;
    const MultiIndex j = unflatten(l, k + 1, d);
    const LocalNodeInfo info = classify_node(j, k, d);
    if (info.free_axes == 0) continue;
    const Point<double> x = velocity_node(ref, j);
    const Eigen::MatrixXd J = G.jacobian_matrix(x);
    const BasisTable pt = tabulate(ref.pressure, d, x);
    for (int i = 0; i < d; ++i)
      if (info.free_axes & (1u << i)) T.middleRows(l * d, d) += J.col(i) * pt.grads.row(i);
  }
  return T;
}

TOperator build_t(const Mesh& mesh, const FemSystem& sys) {
  if (!mesh.satisfies_integrand_condition()) {
    throw Error(ErrorKind::ConditionViolation, "T operator requires bilinear 2D or affine 3D elements");
  }
  if (!validate_t_assumption(mesh)) {
    throw Error(ErrorKind::UnsupportedMesh,
                "T operator requires every element to have a vertex whose incident facets are all interior");
  }
  const Index nvel = sys.num_velocity_dofs();
  const Index npr = sys.num_pressure_dofs();
  TOperator T;
  T.t = Eigen::MatrixXd::Zero(nvel, npr);
  std::vector<bool> written(nvel, false);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const std::vector<bool> excluded = excluded_velocity_nodes(sys, e);
    Eigen::MatrixXd TK = element_t_matrix(mesh.map(e), sys.k, excluded);
    const std::vector<Index> vdofs = sys.element_velocity_dofs(e);
    const std::vector<Index>& pdofs = sys.element_pressure_dofs(e);
    for (std::size_t a = 0; a < vdofs.size(); ++a) {
      const Index g = vdofs[a];
      if (g < 0) continue;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(npr);
      for (std::size_t m = 0; m < pdofs.size(); ++m) row[pdofs[m]] += TK(a, m);
      if (!written[g]) {
        T.t.row(g) = row;
        written[g] = true;
        continue;
      }
      const double scale = std::max({T.t.row(g).cwiseAbs().maxCoeff(), row.cwiseAbs().maxCoeff(),
                                     std::numeric_limits<double>::min()});
      const double gap = (T.t.row(g) - row).cwiseAbs().maxCoeff() / scale;
      T.consistency_gap = std::max(T.consistency_gap, gap);
      if (gap > 1e-10) {
        throw Error(ErrorKind::Numerical, "T operator assignments disagree at velocity dof " + std::to_string(g) +
                                              " (relative gap " + std::to_string(gap) + ")");
      }
    }
    T.element_blocks.push_back(std::move(TK));
  }
  return T;
}

CoercivityReport coercivity_check(const Mesh& mesh, const FemSystem& sys, const TOperator& T) {
  CoercivityReport r;
  const Eigen::MatrixXd TB = T.t.transpose() * sys.b;
  const Eigen::MatrixXd S = 0.5 * (TB + TB.transpose());
  const GeneralizedEigen lower = sym_gen_eig(S, sys.pr_meshdep, sys.pr_ones);
  const SpectrumSummary ls = summarize_spectrum(lower.values);
  r.c_t = ls.min_positive;
  r.kernel_dim = ls.kernel_dim + 1;
  const Eigen::MatrixXd U = T.t.transpose() * sys.vel_h1 * T.t;
  const GeneralizedEigen upper = sym_gen_eig(U, sys.pr_meshdep, sys.pr_ones);
  r.C_t = std::sqrt(std::max(0.0, upper.values.maxCoeff()));

  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const LocalSpaces loc = local_spaces(mesh, sys, e);
    const Eigen::MatrixXd TK = restrict_rows(T.element_blocks[e], loc.kept);
    const Eigen::MatrixXd G = loc.h * loc.h * loc.pr_grad;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(G.rows());
    const Eigen::MatrixXd TBK = TK.transpose() * loc.b;
    const GeneralizedEigen le = sym_gen_eig(0.5 * (TBK + TBK.transpose()), G, ones);
    r.element_c_t.push_back(summarize_spectrum(le.values).min_positive);
    const GeneralizedEigen ue = sym_gen_eig(TK.transpose() * loc.vel_h1 * TK, G, ones);
    r.element_C_t.push_back(std::sqrt(std::max(0.0, ue.values.maxCoeff())));
  }
  return r;
}

NormalTraceReport normal_trace_check(const Mesh& mesh, const FemSystem& sys, const TOperator& T) {
  NormalTraceReport r;
  const int d = sys.dim;
  const int k = sys.k;
  const TaylorHoodReference ref(d, k);
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const std::vector<Index> vdofs = sys.element_velocity_dofs(e);
    const std::vector<Index>& pdofs = sys.element_pressure_dofs(e);
    for (Index l = 0; l < ref.velocity_nodes(); ++l) {
      const MultiIndex j = unflatten(l, k + 1, d);
      Eigen::MatrixXd V = Eigen::MatrixXd::Zero(d, pdofs.size());
      for (int c = 0; c < d; ++c) {
        const Index g = vdofs[l * d + c];
        if (g < 0) continue;
        for (std::size_t m = 0; m < pdofs.size(); ++m) V(c, m) = T.t(g, pdofs[m]);
      }
      const Eigen::MatrixXd cof = mesh.map(e).jacobian(velocity_node(ref, j)).cof;
      for (int axis = 0; axis < d; ++axis) {
        if (j[axis] != 0 && j[axis] != k) continue;
        const Eigen::VectorXd cof_n = (j[axis] == k ? 1.0 : -1.0) * cof.col(axis);
        const Eigen::RowVectorXd flux = cof_n.transpose() * V;
        if (flux.size() > 0) r.max_abs = std::max(r.max_abs, flux.cwiseAbs().maxCoeff());
        const double vmax = V.size() > 0 ? V.colwise().norm().maxCoeff() : 0.0;
        r.scale = std::max(r.scale, vmax * cof_n.norm());
      }
    }
  }
  return r;
}

double sum_of_squares(const GeometryMap<double>& G, int k, const std::vector<bool>& excluded,
                      const Eigen::VectorXd& q) {
  const int d = G.dim();
  const TaylorHoodReference ref(d, k);
  const auto& w1 = gauss_lobatto_rule<double>(k + 1).weights;
  double sum = 0.0;
  for (Index l = 0; l < ref.velocity_nodes(); ++l) {
    if (excluded[l]) continue;
    const MultiIndex j = unflatten(l, k + 1, d);
    const LocalNodeInfo info = classify_node(j, k, d);
    if (info.free_axes == 0) continue;
    const Point<double> x = velocity_node(ref, j);
    double w = 1.0;
    for (int i = 0; i < d; ++i) w *= w1[j[i]];
    const Eigen::VectorXd g = tabulate(ref.pressure, d, x).grads * q;
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      if (info.free_axes & (1u << i)) s += g[i] * g[i];
    sum += w * G.jacobian(x).det * s;
  }
  return sum;
}

double sum_of_squares_gap(const Mesh& mesh, const FemSystem& sys, const TOperator& T, int samples,
                          std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const Eigen::MatrixXd BK = element_b(mesh.map(e), sys.k, QuadratureMode::ReferenceHighOrder);
    const std::vector<bool> excluded = excluded_velocity_nodes(sys, e);
    const Eigen::MatrixXd& TK = T.element_blocks[e];
    for (int s = 0; s < samples; ++s) {
      Eigen::VectorXd q(TK.cols());
      for (Index i = 0; i < q.size(); ++i) q[i] = rng.uniform(-1.0, 1.0);
      const double assembled = (TK * q).dot(BK * q);
      const double formula = sum_of_squares(mesh.map(e), sys.k, excluded, q);
      const double scale = std::max(std::abs(formula), std::numeric_limits<double>::min());
      worst = std::max(worst, std::abs(assembled - formula) / scale);
    }
  }
  return worst;
}

nlohmann::json t_audit(const Mesh& mesh, const FemSystem& sys, const TOperator& T, const Eigen::VectorXd& q) {
  if (q.size() != sys.num_pressure_dofs()) throw Error(ErrorKind::InvalidArgument, "pressure vector has wrong size");
  const int d = sys.dim;
  nlohmann::json nodes = nlohmann::json::array();
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto& globals = sys.velocity_nodes.local_to_global[e];
    const std::vector<Index>& pdofs = sys.element_pressure_dofs(e);
    Eigen::VectorXd ql(pdofs.size());
    for (std::size_t m = 0; m < pdofs.size(); ++m) ql[m] = q[pdofs[m]];
    const Eigen::VectorXd v = T.element_blocks[e] * ql;
    for (std::size_t l = 0; l < globals.size(); ++l) {
      const LocalNodeInfo info = sys.velocity_nodes.local_info[l];
      std::vector<double> assigned(v.data() + l * d, v.data() + (l + 1) * d);
      nodes.push_back({{"element", e},
                       {"local", l},
                       {"global", globals[l]},
                       {"class", to_string(info.cls)},
                       {"free_axes", info.free_axes},
                       {"boundary", static_cast<bool>(sys.velocity_nodes.on_boundary[globals[l]])},
                       {"assigned", assigned}});
    }
  }
  return {{"dim", d}, {"k", sys.k}, {"consistency_gap", T.consistency_gap}, {"nodes", nodes}};
}

}  // namespace thstab
