#include "thstab/spaces.hpp"

#include <cmath>
#include <string>

#include "thstab/error.hpp"
#include "thstab/gauss_lobatto.hpp"
#include "thstab/reference_element.hpp"

namespace thstab {

namespace {

int high_order_points(int k) { return 2 * k + 3; }

void check_degree(int k) {
  if (k < 2 || k + 1 > kMaxLobattoPoints) {
    throw Error(ErrorKind::InvalidArgument,
                "Taylor-Hood degree k must be in [2, " + std::to_string(kMaxLobattoPoints - 1) + "]");
  }
}

Eigen::MatrixXd element_b_lobatto(const GeometryMap<double>& G, const TaylorHoodReference& ref,
                                  bool facet_terms) {
  const int d = ref.dim;
  const int k = ref.k;
  const Index nv = ref.velocity_nodes();
  const Index np = ref.pressure_nodes();
  const std::vector<double>& w1 = gauss_lobatto_rule<double>(k + 1).weights;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d * nv, np);
  for (Index l = 0; l < nv; ++l) {
    const MultiIndex j = unflatten(l, k + 1, d);
    Point<double> x(d);
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      x[i] = ref.velocity.nodes()[j[i]];
      w *= w1[j[i]];
    }
    const JacobianData<double> jd = G.jacobian(x);
    const BasisTable pt = tabulate(ref.pressure, d, x);
    B.middleRows(l * d, d) += w * (jd.cof * pt.grads);
    if (!facet_terms) continue;
    for (int axis = 0; axis < d; ++axis) {
      if (j[axis] != 0 && j[axis] != k) continue;
      const double sign = j[axis] == k ? 1.0 : -1.0;
      double wf = 1.0;
      for (int i = 0; i < d; ++i)
        if (i != axis) wf *= w1[j[i]];
      const Point<double> cof_n = sign * jd.cof.col(axis);
      B.middleRows(l * d, d) -= wf * cof_n * pt.values.transpose();
    }
  }
  return B;
}

Eigen::MatrixXd element_b_divergence(const GeometryMap<double>& G, const TaylorHoodReference& ref) {
  const int d = ref.dim;
  const Index nv = ref.velocity_nodes();
  const Index np = ref.pressure_nodes();
  const TensorQuadrature<double> rule = reference_rule<double>(high_order_points(ref.k), d);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(d * nv, np);
  for (Index q = 0; q < rule.size(); ++q) {
    const Point<double> x = rule.point(q);
    const double w = rule.weight(q);
    const JacobianData<double> jd = G.jacobian(x);
    const BasisTable vt = tabulate(ref.velocity, d, x);
    const BasisTable pt = tabulate(ref.pressure, d, x);
    // (cof(J) grad phi_l)_c = |J| (div of phi_l e_c) in physical space
    const Eigen::MatrixXd div = jd.cof * vt.grads;
    for (Index l = 0; l < nv; ++l)
      for (int c = 0; c < d; ++c) B.row(l * d + c) -= (w * div(c, l)) * pt.values.transpose();
  }
  return B;
}

Eigen::MatrixXd expand_components(const Eigen::MatrixXd& scalar, int d) {
  const Index n = scalar.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * d, n * d);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b)
      for (int c = 0; c < d; ++c) out(a * d + c, b * d + c) = scalar(a, b);
  return out;
}

}  // namespace

const char* to_string(QuadratureMode mode) {
  return mode == QuadratureMode::GaussLobatto ? "gauss_lobatto_kp1" : "reference_high_order";
}

Eigen::MatrixXd element_b(const GeometryMap<double>& G, int k, QuadratureMode mode, bool facet_terms) {
  check_degree(k);
  const TaylorHoodReference ref(G.dim(), k);
  return mode == QuadratureMode::GaussLobatto ? element_b_lobatto(G, ref, facet_terms)
                                               : element_b_divergence(G, ref);
}

ElementMatrices element_matrices(const GeometryMap<double>& G, int k, QuadratureMode mode, bool facet_terms) {
  check_degree(k);
  const int d = G.dim();
  const TaylorHoodReference ref(d, k);
  const Index nv = ref.velocity_nodes();
  const Index np = ref.pressure_nodes();
  Eigen::MatrixXd vm = Eigen::MatrixXd::Zero(nv, nv), vk = Eigen::MatrixXd::Zero(nv, nv);
  Eigen::MatrixXd pm = Eigen::MatrixXd::Zero(np, np), pk = Eigen::MatrixXd::Zero(np, np);
  const TensorQuadrature<double> rule = reference_rule<double>(high_order_points(k), d);
  for (Index q = 0; q < rule.size(); ++q) {
    const Point<double> x = rule.point(q);
    const double w = rule.weight(q);
    const JacobianData<double> jd = G.jacobian(x);
    // J^{-1} J^{-T} |J| = cof^T cof / |J|
    const Eigen::MatrixXd metric = jd.cof.transpose() * jd.cof / jd.det;
    const BasisTable vt = tabulate(ref.velocity, d, x);
    const BasisTable pt = tabulate(ref.pressure, d, x);
    vm.noalias() += (w * jd.det) * vt.values * vt.values.transpose();
    vk.noalias() += w * vt.grads.transpose() * metric * vt.grads;
    pm.noalias() += (w * jd.det) * pt.values * pt.values.transpose();
    pk.noalias() += w * pt.grads.transpose() * metric * pt.grads;
  }
  ElementMatrices m;
  m.b = mode == QuadratureMode::GaussLobatto ? element_b_lobatto(G, ref, facet_terms)
                                              : element_b_divergence(G, ref);
  m.vel_mass = expand_components(vm, d);
  m.vel_stiffness = expand_components(vk, d);
  m.pr_mass = pm;
  m.pr_stiffness = pk;
  return m;
}

std::vector<Index> FemSystem::element_velocity_dofs(Index e) const {
  const auto& nodes = velocity_nodes.local_to_global[e];
  std::vector<Index> dofs(nodes.size() * dim);
  for (std::size_t l = 0; l < nodes.size(); ++l)
    for (int c = 0; c < dim; ++c) dofs[l * dim + c] = velocity_dof(nodes[l], c);
  return dofs;
}

FemSystem assemble(const Mesh& mesh, int k, const AssemblyOptions& options) {
  check_degree(k);
  if (options.quadrature == QuadratureMode::GaussLobatto && !mesh.satisfies_integrand_condition()) {
    throw Error(ErrorKind::ConditionViolation,
                "Gauss-Lobatto assembly is exact only for bilinear 2D or affine 3D elements; "
                "use the reference_high_order quadrature mode");
  }
  FemSystem sys;
  sys.dim = mesh.dim();
  sys.k = k;
  sys.options = options;
  sys.velocity_nodes = build_node_table(mesh, k);
  sys.pressure_nodes = build_node_table(mesh, k - 1);
  const int d = sys.dim;

  Index slots = 0;
  sys.velocity_slot.assign(sys.velocity_nodes.size(), -1);
  for (Index n = 0; n < sys.velocity_nodes.size(); ++n)
    if (!sys.velocity_nodes.on_boundary[n]) sys.velocity_slot[n] = slots++;
  const Index nvel = slots * d;
  const Index npr = sys.pressure_nodes.size();

  sys.b = Eigen::MatrixXd::Zero(nvel, npr);
  sys.vel_l2 = Eigen::MatrixXd::Zero(nvel, nvel);
  sys.vel_grad = Eigen::MatrixXd::Zero(nvel, nvel);
  sys.pr_l2 = Eigen::MatrixXd::Zero(npr, npr);
  sys.pr_grad = Eigen::MatrixXd::Zero(npr, npr);
  sys.pr_meshdep = Eigen::MatrixXd::Zero(npr, npr);
  sys.pr_ones = Eigen::VectorXd::Ones(npr);

  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const ElementMatrices m = element_matrices(mesh.map(e), k, options.quadrature, options.facet_terms);
    const double h = mesh.diameter(e);
    sys.element_h.push_back(h);
    const std::vector<Index> vdofs = sys.element_velocity_dofs(e);
    const std::vector<Index>& pdofs = sys.element_pressure_dofs(e);
    for (std::size_t a = 0; a < vdofs.size(); ++a) {
      if (vdofs[a] < 0) continue;
      for (std::size_t m2 = 0; m2 < pdofs.size(); ++m2) sys.b(vdofs[a], pdofs[m2]) += m.b(a, m2);
      for (std::size_t c = 0; c < vdofs.size(); ++c) {
        if (vdofs[c] < 0) continue;
        sys.vel_l2(vdofs[a], vdofs[c]) += m.vel_mass(a, c);
        sys.vel_grad(vdofs[a], vdofs[c]) += m.vel_stiffness(a, c);
      }
    }
    for (std::size_t a = 0; a < pdofs.size(); ++a) {
      for (std::size_t c = 0; c < pdofs.size(); ++c) {
        sys.pr_l2(pdofs[a], pdofs[c]) += m.pr_mass(a, c);
        sys.pr_grad(pdofs[a], pdofs[c]) += m.pr_stiffness(a, c);
        sys.pr_meshdep(pdofs[a], pdofs[c]) += h * h * m.pr_stiffness(a, c);
      }
    }
  }
  sys.vel_h1 = options.h1_seminorm ? sys.vel_grad : Eigen::MatrixXd(sys.vel_l2 + sys.vel_grad);
  return sys;
}

const Eigen::MatrixXd& gram(const FemSystem& sys, NormKind which) {
  switch (which) {
    case NormKind::VelocityH1: return sys.vel_h1;
    case NormKind::VelocityL2: return sys.vel_l2;
    case NormKind::PressureL2: return sys.pr_l2;
    case NormKind::PressureGrad: return sys.pr_grad;
    case NormKind::PressureMeshDependent: return sys.pr_meshdep;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown norm");
}

double norm(const FemSystem& sys, NormKind which, const Eigen::VectorXd& x) {
  const Eigen::MatrixXd& G = gram(sys, which);
  if (x.size() != G.rows()) {
    throw Error(ErrorKind::InvalidArgument, "vector size " + std::to_string(x.size()) +
                                                " does not match the dof count " + std::to_string(G.rows()));
  }
  return std::sqrt(std::max(0.0, x.dot(G * x)));
}

double apply_b(const FemSystem& sys, const Eigen::VectorXd& v, const Eigen::VectorXd& q) {
  if (v.size() != sys.num_velocity_dofs() || q.size() != sys.num_pressure_dofs()) {
    throw Error(ErrorKind::InvalidArgument, "apply_b: vector sizes do not match the dof maps");
  }
  return v.dot(sys.b * q);
}

Eigen::VectorXd interpolate_pressure(const FemSystem& sys, const std::function<double(const Point<double>&)>& f) {
  Eigen::VectorXd q(sys.num_pressure_dofs());
  for (Index n = 0; n < sys.pressure_nodes.size(); ++n) q[n] = f(sys.pressure_nodes.coordinates[n]);
  return q;
}

Eigen::VectorXd interpolate_velocity(const FemSystem& sys,
                                     const std::function<Point<double>(const Point<double>&)>& f) {
  Eigen::VectorXd v(sys.num_velocity_dofs());
  for (Index n = 0; n < sys.velocity_nodes.size(); ++n) {
    if (sys.velocity_slot[n] < 0) continue;
    const Point<double> value = f(sys.velocity_nodes.coordinates[n]);
    for (int c = 0; c < sys.dim; ++c) v[sys.velocity_dof(n, c)] = value[c];
  }
  return v;
}

LocalSpaces local_spaces(const Mesh& mesh, const FemSystem& sys, Index e) {
  const ElementMatrices m = element_matrices(mesh.map(e), sys.k, sys.options.quadrature, true);
  const std::vector<Index> vdofs = sys.element_velocity_dofs(e);
  LocalSpaces loc;
  for (std::size_t a = 0; a < vdofs.size(); ++a)
    if (vdofs[a] >= 0) loc.kept.push_back(static_cast<Index>(a));
  const Index n = static_cast<Index>(loc.kept.size());
  const Eigen::MatrixXd h1 = sys.options.h1_seminorm ? m.vel_stiffness : Eigen::MatrixXd(m.vel_mass + m.vel_stiffness);
  loc.b.resize(n, m.b.cols());
  loc.vel_h1.resize(n, n);
  loc.vel_l2.resize(n, n);
  for (Index a = 0; a < n; ++a) {
    loc.b.row(a) = m.b.row(loc.kept[a]);
    for (Index c = 0; c < n; ++c) {
      loc.vel_h1(a, c) = h1(loc.kept[a], loc.kept[c]);
      loc.vel_l2(a, c) = m.vel_mass(loc.kept[a], loc.kept[c]);
    }
  }
  loc.pr_l2 = m.pr_mass;
  loc.pr_grad = m.pr_stiffness;
  loc.h = mesh.diameter(e);
  return loc;
}

}  // namespace thstab
