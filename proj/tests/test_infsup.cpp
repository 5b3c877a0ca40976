#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include <Eigen/Eigenvalues>

#include "thstab/eigensolve.hpp"
#include "thstab/infsup.hpp"
#include "thstab/random.hpp"
#include "thstab/t_operator.hpp"

using namespace thstab;

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

// Rotation by angle a about the origin plus a translation.
Mesh rigid_motion(const Mesh& m, double a) {
  std::vector<Point<double>> v = m.vertices();
  for (auto& x : v) {
    const double x0 = x[0], x1 = x[1];
    x[0] = std::cos(a) * x0 - std::sin(a) * x1 + 0.7;
    x[1] = std::sin(a) * x0 + std::cos(a) * x1 - 1.3;
  }
  return Mesh(m.dim(), m.kind(), v, m.elements());
}

}  // namespace

TEST_CASE("single element system is degenerate only without velocity dofs") {
  const FemSystem one = assemble(square(1), 2);
  const InfSupResult b = infsup_classical(one);
  CHECK(b.value > 0.0);
  CHECK(b.kernel_dim >= 1);

  const Mesh c = cube(1);
  StructuredSpec s;
  s.kind = StructuredKind::Parallelepiped3D;
  const FemSystem sys = assemble(c, 2);
  CHECK(sys.num_velocity_dofs() == 3);
  CHECK_NOTHROW(infsup_bp(sys));
}

TEST_CASE("inf-sup constants on structured meshes") {
  const FemSystem s4 = assemble(square(4), 2);
  const InfSupResult beta = infsup_classical(s4);
  CHECK(beta.value > 0.01);
  CHECK(beta.kernel_dim == 1);
  CHECK(std::abs(s4.pr_ones.dot(s4.pr_l2 * beta.mode)) <= 1e-10);
  CHECK(norm(s4, NormKind::PressureL2, beta.mode) == doctest::Approx(1.0).epsilon(1e-10));

  const FemSystem s2 = assemble(square(2), 2);
  const InfSupResult g2 = infsup_bp(s2), g4 = infsup_bp(s4);
  CHECK(g4.value >= 0.5 * g2.value);
  const InfSupResult d2 = infsup_meshdep(s2), d4 = infsup_meshdep(s4);
  CHECK(d4.value >= 0.5 * d2.value);
  CHECK(d4.value <= 2.0 * d2.value);

  const FemSystem c2 = assemble(cube(2, 0.3), 2);
  CHECK(infsup_bp(c2).value > 0.0);
}

TEST_CASE("delta dominates the ratio achieved by v = T q") {
  const Mesh m = square(3, 0.2, 6);
  const FemSystem sys = assemble(m, 2);
  const InfSupResult delta = infsup_meshdep(sys);
  const TOperator T = build_t(m, sys);
  const Eigen::VectorXd& q = delta.mode;
  const Eigen::VectorXd v = T.t * q;
  const double ratio =
      apply_b(sys, v, q) / (norm(sys, NormKind::VelocityH1, v) * norm(sys, NormKind::PressureMeshDependent, q));
  CHECK(delta.value >= ratio - 1e-9);
  const CoercivityReport rep = coercivity_check(m, sys, T);
  CHECK(delta.value >= rep.c_t / rep.C_t - 1e-9);
}

TEST_CASE("constants are invariant under relabeling and rigid motions") {
  const Mesh m = square(3, 0.25, 3);
  std::vector<Index> order;
  for (Index e = m.num_elements() - 1; e >= 0; --e) order.push_back(e);
  const FemSystem a = assemble(m, 2);
  const FemSystem b = assemble(relabeled(m, order), 2);
  const FemSystem c = assemble(rigid_motion(m, 0.7), 2);
  for (auto f : {infsup_classical, infsup_bp, infsup_meshdep}) {
    const double va = f(a).value;
    CHECK(test::rel_diff(va, f(b).value) <= 1e-9);
    CHECK(test::rel_diff(va, f(c).value) <= 1e-9);
  }
  const Mesh mc = rigid_motion(m, 0.7);
  for (Index e = 0; e < m.num_elements(); ++e) {
    CHECK(test::rel_diff(infsup_local(m, a, e, LocalNormPair::L2Grad).value,
                         infsup_local(mc, c, e, LocalNormPair::L2Grad).value) <= 1e-9);
  }
}

TEST_CASE("classical mode is sign-normalized and invariant under scaling with the seminorm") {
  AssemblyOptions semi;
  semi.h1_seminorm = true;
  const Mesh m = square(3, 0.2, 2);
  const FemSystem a = assemble(m, 2, semi);
  const FemSystem b = assemble(scaled(m, 5.0), 2, semi);
  const InfSupResult ra = infsup_classical(a), rb = infsup_classical(b);
  Index big = 0;
  ra.mode.cwiseAbs().maxCoeff(&big);
  CHECK(ra.mode[big] > 0.0);
  // Mode vectors agree after normalizing to unit max norm.
  const Eigen::VectorXd na = ra.mode / ra.mode.cwiseAbs().maxCoeff();
  const Eigen::VectorXd nb = rb.mode / rb.mode.cwiseAbs().maxCoeff();
  CHECK((na - nb).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("local constants") {
  const Mesh m = square(2);
  const FemSystem sys = assemble(m, 2);
  for (Index e = 0; e < m.num_elements(); ++e) {
    const InfSupResult bp = infsup_local(m, sys, e, LocalNormPair::L2Grad);
    CHECK(bp.value > 0.0);
    CHECK(bp.kernel_dim == 1);
    CHECK(infsup_local(m, sys, e, LocalNormPair::H1MeshGrad).value > 0.0);
  }
  // Scaling invariance of the (H1, h grad) pair with the seminorm flag.
  AssemblyOptions semi;
  semi.h1_seminorm = true;
  const Mesh p = square(2, 0.3, 4);
  const Mesh ps = scaled(p, 0.01);
  const FemSystem a = assemble(p, 2, semi), b = assemble(ps, 2, semi);
  for (Index e = 0; e < p.num_elements(); ++e) {
    CHECK(test::rel_diff(infsup_local(p, a, e, LocalNormPair::H1MeshGrad).value,
                         infsup_local(ps, b, e, LocalNormPair::H1MeshGrad).value) <= 1e-10);
  }
}

TEST_CASE("high-order route still gives finite constants on the counterexample") {
  const Mesh m = counterexample_mesh();
  AssemblyOptions hi;
  hi.quadrature = QuadratureMode::ReferenceHighOrder;
  const FemSystem sys = assemble(m, 2, hi);
  const InfSupResult b = infsup_classical(sys);
  CHECK(std::isfinite(b.value));
}

TEST_CASE("semi-norm equivalence") {
  for (int d = 2; d <= 3; ++d)
    for (int k = 2; k <= 4; ++k) {
      CAPTURE(d);
      CAPTURE(k);
      const SeminormReport r = seminorm_equivalence(k, d, three_adjacent_interior(d));
      CHECK(r.kernel_dim == 1);
      CHECK(r.lambda_min_positive > 0.0);
      CHECK(r.lambda_min_positive >= 1e-8 * r.lambda_max);
      CHECK(r.lambda_max <= 1.0 + 1e-12);
    }
  FaceConfig none{};
  try {
    seminorm_matrices(2, 3, none);
    FAIL("expected unsupported configuration");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedMesh);
  }
  FaceConfig two_axes = three_adjacent_interior(3);
  two_axes[4] = false;
  CHECK_THROWS_AS(seminorm_matrices(2, 3, two_axes), Error);
}

TEST_CASE("adding interior faces can only grow the first semi-norm") {
  Rng rng(21);
  for (int d = 2; d <= 3; ++d) {
    const SeminormPair three = seminorm_matrices(3, d, three_adjacent_interior(d));
    const SeminormPair all = seminorm_matrices(3, d, all_faces_interior(d));
    for (int s = 0; s < 20; ++s) {
      Eigen::VectorXd q(three.first.rows());
      for (Index i = 0; i < q.size(); ++i) q[i] = rng.uniform(-1, 1);
      CHECK(q.dot(all.first * q) >= q.dot(three.first * q) - 1e-12);
    }
    CHECK((all.second - three.second).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("literal Gram inequality M_h <= hmax^2 M_grad") {
  const Mesh m = square(4, 0.3, 9);
  const FemSystem sys = assemble(m, 3);
  const double h = m.max_diameter();
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h * h * sys.pr_grad - sys.pr_meshdep).eigenvalues();
  CHECK(ev.minCoeff() >= -1e-12 * ev.cwiseAbs().maxCoeff());
}

TEST_CASE("Schur complement routes agree on an assembled system") {
  const FemSystem sys = assemble(square(3, 0.2), 2);
  const Eigen::MatrixXd a = schur_complement(sys.b, sys.vel_h1, SchurRoute::TriangularSolve);
  const Eigen::MatrixXd b = schur_complement(sys.b, sys.vel_h1, SchurRoute::FullSolve);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * b.cwiseAbs().maxCoeff());
}
