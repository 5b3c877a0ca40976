#include <doctest.h>

#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "support.hpp"
#include "thstab/gauss_lobatto.hpp"
#include "thstab/mesh.hpp"
#include "thstab/spaces.hpp"

using namespace thstab;
using test::pt;

namespace {

Mesh square(int N, double theta = 0.0, std::uint64_t seed = 1) {
  StructuredSpec s;
  s.subdivisions = N;
  s.theta = theta;
  s.seed = seed;
  return gen_structured(s);
}

Mesh cube(int N, double shear = 0.0) {
  StructuredSpec s;
  s.kind = StructuredKind::Parallelepiped3D;
  s.subdivisions = N;
  s.shear = shear;
  return gen_structured(s);
}

double max_rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(a.cwiseAbs().maxCoeff(), 1e-300);
}

// Permutation taking nodes of table `a` to nodes of `b` with equal coordinates.
std::vector<Index> match_nodes(const GlobalNodeTable& a, const GlobalNodeTable& b, double h) {
  std::map<std::vector<long long>, Index> where;
  auto key = [&](const Point<double>& x) {
    std::vector<long long> k;
    for (Index i = 0; i < x.size(); ++i) k.push_back(std::llround(x[i] / h * 1e8));
    return k;
  };
  for (Index n = 0; n < b.size(); ++n) where[key(b.coordinates[n])] = n;
  std::vector<Index> perm(a.size());
  for (Index n = 0; n < a.size(); ++n) perm[n] = where.at(key(a.coordinates[n]));
  return perm;
}

}  // namespace

TEST_CASE("dof counts") {
  const FemSystem one = assemble(square(1), 2);
  CHECK(one.num_velocity_dofs() == 2);
  CHECK(one.num_pressure_dofs() == 4);
  const FemSystem two = assemble(square(2), 3);
  CHECK(two.num_velocity_dofs() == 2 * 5 * 5);
  CHECK(two.num_pressure_dofs() == 25);
  const FemSystem c = assemble(cube(2, 0.3), 2);
  CHECK(c.num_velocity_dofs() == 3 * 27);
  CHECK(c.num_pressure_dofs() == 27);
}

TEST_CASE("constant pressures are in the kernel of B") {
  for (auto mode : {QuadratureMode::GaussLobatto, QuadratureMode::ReferenceHighOrder}) {
    AssemblyOptions o;
    o.quadrature = mode;
    for (const Mesh& m : {square(3, 0.3), cube(2, 0.4)}) {
      const FemSystem sys = assemble(m, 2, o);
      const Eigen::VectorXd r = sys.b * sys.pr_ones;
      CHECK(r.cwiseAbs().maxCoeff() <= 1e-13 * sys.b.cwiseAbs().maxCoeff());
      const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(sys.num_velocity_dofs(), -1.0, 2.0);
      CHECK(std::abs(apply_b(sys, v, 3.0 * sys.pr_ones)) <= 1e-12);
      CHECK(apply_b(sys, Eigen::VectorXd::Zero(sys.num_velocity_dofs()), sys.pr_ones) == 0.0);
    }
  }
}

TEST_CASE("quadrature modes agree where the integrand condition holds") {
  for (int k = 2; k <= 4; ++k) {
    CAPTURE(k);
    for (const Mesh& m : {square(3, 0.3, 7), cube(2, 0.3)}) {
      if (m.dim() == 3 && k > 3) continue;
      AssemblyOptions hi;
      hi.quadrature = QuadratureMode::ReferenceHighOrder;
      const FemSystem a = assemble(m, k);
      const FemSystem b = assemble(m, k, hi);
      CHECK(max_rel(a.b, b.b) <= 1e-11);
      AssemblyOptions nofacet;
      nofacet.facet_terms = false;
      CHECK(max_rel(a.b, assemble(m, k, nofacet).b) <= 1e-11);
    }
  }
}

TEST_CASE("Gauss-Lobatto assembly is refused on the counterexample") {
  const Mesh m = counterexample_mesh();
  try {
    assemble(m, 2);
    FAIL("expected condition violation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConditionViolation);
  }
  AssemblyOptions hi;
  hi.quadrature = QuadratureMode::ReferenceHighOrder;
  CHECK_NOTHROW(assemble(m, 2, hi));
  // Element level: the two routes disagree measurably.
  const Eigen::MatrixXd gl = element_b(m.map(0), 2, QuadratureMode::GaussLobatto);
  const Eigen::MatrixXd ho = element_b(m.map(0), 2, QuadratureMode::ReferenceHighOrder);
  CHECK((gl - ho).cwiseAbs().maxCoeff() >= 1e-4);
}

TEST_CASE("b(v, q) matches -int q div v by physical quadrature") {
  // Uniform square: the element maps are scalings, so these polynomials lie in the discrete spaces.
  auto v = [](const Point<double>& x) {
    const double bub = x[0] * (1 - x[0]) * x[1] * (1 - x[1]);
    return pt({bub, 2 * bub});
  };
  auto q = [](const Point<double>& x) { return x[0] * x[1] - 0.3 * x[0]; };
  auto div_v = [](const Point<double>& x) {
    return (1 - 2 * x[0]) * x[1] * (1 - x[1]) + 2 * x[0] * (1 - x[0]) * (1 - 2 * x[1]);
  };
  for (int k = 2; k <= 3; ++k) {
    const FemSystem sys = assemble(square(2), k);
    const Eigen::VectorXd vv = interpolate_velocity(sys, v);
    const Eigen::VectorXd qq = interpolate_pressure(sys, q);
    const double oracle =
        -integrate_tensor([&](const Point<double>& x) { return q(x) * div_v(x); }, reference_rule<double>(10, 2));
    CHECK(std::abs(apply_b(sys, vv, qq) - oracle) <= 1e-11);
  }
  // Same check in 3D on the unit cube, k = 2.
  auto v3 = [](const Point<double>& x) {
    const double bub = x[0] * (1 - x[0]) * x[1] * (1 - x[1]) * x[2] * (1 - x[2]);
    return pt({0.0, 0.0, bub});
  };
  auto q3 = [](const Point<double>& x) { return x[2] + x[0] * x[1]; };
  auto div3 = [](const Point<double>& x) { return x[0] * (1 - x[0]) * x[1] * (1 - x[1]) * (1 - 2 * x[2]); };
  const FemSystem s3 = assemble(cube(2), 2);
  const double oracle3 = -integrate_tensor([&](const Point<double>& x) { return q3(x) * div3(x); },
                                           reference_rule<double>(6, 3));
  CHECK(std::abs(apply_b(s3, interpolate_velocity(s3, v3), interpolate_pressure(s3, q3)) - oracle3) <= 1e-12);
}

TEST_CASE("norm examples") {
  const FemSystem sys = assemble(square(2, 0.2), 2);
  CHECK(norm(sys, NormKind::VelocityH1, Eigen::VectorXd::Zero(sys.num_velocity_dofs())) == 0.0);
  CHECK(norm(sys, NormKind::PressureGrad, 2.0 * sys.pr_ones) <= 1e-7);
  CHECK(norm(sys, NormKind::PressureL2, -2.0 * sys.pr_ones) == doctest::Approx(2.0).epsilon(1e-12));
  const FemSystem u = assemble(square(3), 2);
  const Eigen::VectorXd qx = interpolate_pressure(u, [](const Point<double>& x) { return x[0]; });
  CHECK(norm(u, NormKind::PressureGrad, qx) == doctest::Approx(1.0).epsilon(1e-12));
  // sum h_K^2 |grad q|^2 with h_K = sqrt(2)/3 on every element.
  CHECK(norm(u, NormKind::PressureMeshDependent, qx) == doctest::Approx(std::sqrt(2.0) / 3).epsilon(1e-12));
  CHECK_THROWS_AS(norm(u, NormKind::PressureL2, Eigen::VectorXd::Zero(3)), Error);
  CHECK_THROWS_AS(apply_b(u, Eigen::VectorXd::Zero(3), qx), Error);
}

TEST_CASE("pressure gradient Grams have a one-dimensional kernel") {
  for (const Mesh& m : {square(3, 0.3), cube(2, 0.3)}) {
    const FemSystem sys = assemble(m, 2);
    for (const Eigen::MatrixXd* G : {&sys.pr_grad, &sys.pr_meshdep}) {
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(*G).eigenvalues();
      const double top = ev[ev.size() - 1];
      CHECK(std::abs(ev[0]) <= 1e-12 * top);
      CHECK(ev[1] >= 1e-8 * top);
    }
  }
}

TEST_CASE("mesh-dependent Gram is bounded by the scaled gradient Gram") {
  const Mesh m = square(4, 0.3, 3);
  const FemSystem sys = assemble(m, 2);
  const double hmax = m.max_diameter();
  const Eigen::MatrixXd diff = hmax * hmax * sys.pr_grad - sys.pr_meshdep;
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(diff).eigenvalues();
  CHECK(ev[0] >= -1e-12 * ev.cwiseAbs().maxCoeff());
}

TEST_CASE("Grams are invariant under element relabeling") {
  for (const Mesh& m : {square(3, 0.25), cube(2, 0.3)}) {
    std::vector<Index> order;
    for (Index e = m.num_elements() - 1; e >= 0; --e) order.push_back(e);
    const Mesh r = relabeled(m, order);
    const FemSystem a = assemble(m, 2), b = assemble(r, 2);
    const double h = m.max_diameter();
    const std::vector<Index> pp = match_nodes(a.pressure_nodes, b.pressure_nodes, h);
    const std::vector<Index> vp = match_nodes(a.velocity_nodes, b.velocity_nodes, h);
    const int d = m.dim();
    auto vdof = [&](const FemSystem& s, Index node, int c) { return s.velocity_dof(node, c); };
    double worst = 0.0;
    const double scale = a.pr_l2.cwiseAbs().maxCoeff();
    for (Index i = 0; i < a.num_pressure_dofs(); ++i)
      for (Index j = 0; j < a.num_pressure_dofs(); ++j) {
        worst = std::max(worst, std::abs(a.pr_l2(i, j) - b.pr_l2(pp[i], pp[j])) / scale);
        worst = std::max(worst, std::abs(a.pr_grad(i, j) - b.pr_grad(pp[i], pp[j])) / a.pr_grad.cwiseAbs().maxCoeff());
      }
    for (Index n = 0; n < a.velocity_nodes.size(); ++n) {
      if (a.velocity_slot[n] < 0) continue;
      for (int c = 0; c < d; ++c)
        for (Index j = 0; j < a.num_pressure_dofs(); ++j)
          worst = std::max(worst, std::abs(a.b(vdof(a, n, c), j) - b.b(vdof(b, vp[n], c), pp[j])) /
                                      a.b.cwiseAbs().maxCoeff());
      for (Index n2 = 0; n2 < a.velocity_nodes.size(); ++n2) {
        if (a.velocity_slot[n2] < 0) continue;
        worst = std::max(worst, std::abs(a.vel_h1(vdof(a, n, 0), vdof(a, n2, 0)) -
                                         b.vel_h1(vdof(b, vp[n], 0), vdof(b, vp[n2], 0))) /
                                    a.vel_h1.cwiseAbs().maxCoeff());
      }
    }
    CHECK(worst <= 1e-13);
  }
}

TEST_CASE("Grams are symmetric positive semidefinite") {
  const FemSystem sys = assemble(square(2, 0.2), 3);
  for (NormKind kind : {NormKind::VelocityH1, NormKind::VelocityL2, NormKind::PressureL2, NormKind::PressureGrad,
                        NormKind::PressureMeshDependent}) {
    const Eigen::MatrixXd& G = gram(sys, kind);
    CHECK(max_rel(G, G.transpose()) <= 1e-14);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G).eigenvalues();
    CHECK(ev[0] >= -1e-12 * ev[ev.size() - 1]);
  }
}

TEST_CASE("local spaces drop boundary velocity dofs only") {
  const Mesh m = square(1);
  const FemSystem sys = assemble(m, 2);
  const LocalSpaces loc = local_spaces(m, sys, 0);
  CHECK(loc.kept.size() == 2);
  CHECK(loc.b.rows() == 2);
  CHECK(loc.b.cols() == 4);
  CHECK(loc.h == doctest::Approx(std::sqrt(2.0)));
  const Mesh m2 = square(2);
  const FemSystem s2 = assemble(m2, 2);
  CHECK(local_spaces(m2, s2, 0).kept.size() == 2 * 4);
}

TEST_CASE("degree range is enforced") {
  CHECK_THROWS_AS(assemble(square(1), 1), Error);
  CHECK_THROWS_AS(element_b(square(1).map(0), 16, QuadratureMode::GaussLobatto), Error);
}
