// Acceptance suite. Prints one PASS/FAIL line per criterion; an optional
// argument selects a single criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "thstab/condition.hpp"
#include "thstab/gauss_lobatto.hpp"
#include "thstab/geometry.hpp"
#include "thstab/infsup.hpp"
#include "thstab/random.hpp"
#include "thstab/t_operator.hpp"
#include "thstab/tensor_poly.hpp"

using namespace thstab;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double runtime_limit;  // seconds
  std::function<void(Outcome&)> body;
};

Mesh square(int N, double theta = 0.0, std::uint64_t seed = 1) {
  StructuredSpec s;
  s.subdivisions = N;
  s.theta = theta;
  s.seed = seed;
  return gen_structured(s);
}

Mesh sheared_cube(int N, double shear = 0.3) {
  StructuredSpec s;
  s.kind = StructuredKind::Parallelepiped3D;
  s.subdivisions = N;
  s.shear = shear;
  return gen_structured(s);
}

GeometryMap<double> random_bilinear(Rng& rng, double theta) {
  GeometryMap<double>::VertexMatrix v(2, 4);
  for (int p = 0; p < 4; ++p)
    for (int i = 0; i < 2; ++i) v(i, p) = kCornerBits[p][i] + rng.uniform(-theta, theta) / 2;
  return GeometryMap<double>(MapKind::Bilinear2D, v);
}

GeometryMap<double> random_parallelepiped(Rng& rng, MapKind kind) {
  Eigen::Matrix3d A;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) A(i, j) = (i == j ? 1.0 : 0.0) + rng.uniform(-0.3, 0.3);
  const Eigen::Vector3d o(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  GeometryMap<double>::VertexMatrix v(3, 8);
  for (int p = 0; p < 8; ++p) v.col(p) = o + A * Eigen::Vector3d(kCornerBits[p][0], kCornerBits[p][1], kCornerBits[p][2]);
  return GeometryMap<double>(kind, v);
}

GeometryMap<double> random_trilinear(Rng& rng, double amp) {
  GeometryMap<double>::VertexMatrix v(3, 8);
  for (int p = 0; p < 8; ++p)
    for (int i = 0; i < 3; ++i) v(i, p) = kCornerBits[p][i] + rng.uniform(-amp, amp);
  return GeometryMap<double>(MapKind::Trilinear3D, v);
}

void quadrature_exactness(Outcome& o) {
  for (int k = 2; k <= 6; ++k) {
    const auto rule = gauss_lobatto_rule<double>(k + 1);
    double worst = 0.0;
    for (int p = 0; p <= 2 * k - 1; ++p) {
      const double exact = 1.0 / (p + 1);
      worst = std::max(worst, std::abs(rule.integrate([p](double x) { return std::pow(x, p); }) - exact) / exact);
    }
    o.require(worst <= 1e-12, "k=" + std::to_string(k) + " exactness");
    const double gap = std::abs(rule.integrate([k](double x) { return std::pow(x, 2 * k); }) - 1.0 / (2 * k + 1));
    o.detail << "k=" << k << " gap(2k)=" << gap << " ";
    o.require(gap > 1e-6, "k=" + std::to_string(k) + " gap at degree 2k not above 1e-6");
  }
}

void cofactor_identities(Outcome& o) {
  Rng rng(2);
  double worst = 0.0;
  for (int kind = 0; kind < 3; ++kind) {
    for (int s = 0; s < 100; ++s) {
      const GeometryMap<double> G = kind == 0   ? random_bilinear(rng, 0.3)
                                    : kind == 1 ? random_trilinear(rng, 0.15)
                                                : random_parallelepiped(rng, MapKind::Affine3D);
      const int d = G.dim();
      Point<double> x(d);
      for (int i = 0; i < d; ++i) x[i] = rng.uniform();
      const JacobianData<double> jd = G.jacobian(x);
      const double s2 = jd.J.squaredNorm();
      worst = std::max(worst, (jd.det * jd.J.inverse().transpose() - jd.cof).cwiseAbs().maxCoeff() / s2);
      worst = std::max(worst, (jd.J.transpose() * jd.cof - jd.det * Matrix<double>::Identity(d, d))
                                      .cwiseAbs()
                                      .maxCoeff() / s2);
      if (d == 3) {
        const auto cols = cof_columns_crossproduct(G, x);
        for (int j = 0; j < 3; ++j) worst = std::max(worst, (cols[j] - jd.cof.col(j)).cwiseAbs().maxCoeff() / s2);
      }
    }
  }
  o.detail << "max rel residual " << worst;
  o.require(worst <= 1e-10, "identity residual");
}

void counterexample(Outcome& o) {
  const bool member = degree_membership<double>(counterexample_integrand_closed_form, {3, 3, 3});
  Rng rng(3);
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    const Point<double> x = Eigen::Vector3d(rng.uniform(), rng.uniform(), rng.uniform());
    worst = std::max(worst, std::abs(counterexample_integrand(x) - counterexample_integrand_closed_form(x)));
  }
  const CounterexampleGap g = counterexample_gap();
  o.detail << "membership=" << member << " gap=" << g.gap << " |gap-1/720|=" << std::abs(g.gap - 1.0 / 720);
  o.require(!member, "integrand reported in Q3");
  o.require(worst <= 1e-13, "geometry integrand differs from closed form");
  o.require(std::abs(g.gap - 1.0 / 720) <= 1e-12, "gap");
  const ConditionReport r = check_condition(counterexample_mesh().map(0), 2);
  o.require(!r.holds() && r.witness.has_value(), "condition check did not fail");
}

void condition_positive(Outcome& o) {
  Rng rng(4);
  double worst = 0.0;
  int pairs = 0;
  for (int s = 0; s < 50; ++s) {
    const GeometryMap<double> g2 = random_bilinear(rng, rng.uniform(0.0, 0.3));
    const GeometryMap<double> g3 = random_parallelepiped(rng, MapKind::Affine3D);
    for (int k = 2; k <= 3; ++k) {
      for (const GeometryMap<double>* G : {&g2, &g3}) {
        const ConditionReport r = check_condition(*G, k);
        pairs += static_cast<int>(r.pairs_tested);
        o.require(r.holds(), "membership false");
        worst = std::max(worst, r.quadrature_gap / r.quadrature_scale);
      }
    }
  }
  o.detail << "pairs=" << pairs << " max rel B gap " << worst;
  o.require(worst <= 1e-11, "assembly modes disagree");
}

void q3_lemma(Outcome& o) {
  Rng rng(5);
  int trilinear_false = 0, agree = 0;
  for (int s = 0; s < 100; ++s) {
    const Q3Report t = check_q3_equivalence(random_trilinear(rng, 0.15));
    const Q3Report p = check_q3_equivalence(random_parallelepiped(rng, MapKind::Trilinear3D));
    agree += (t.q3_holds == t.all_faces_parallelograms) + (p.q3_holds == p.all_faces_parallelograms);
    trilinear_false += !t.q3_holds;
    o.require(p.q3_holds && p.all_faces_parallelograms, "parallelepiped rejected");
  }
  o.detail << agree << "/200 agree, " << trilinear_false << " trilinear maps fail both";
  o.require(agree == 200, "disagreement");
}

void seminorm(Outcome& o) {
  for (int d = 2; d <= 3; ++d)
    for (int k = 2; k <= 4; ++k) {
      const SeminormReport r = seminorm_equivalence(k, d, three_adjacent_interior(d));
      o.detail << "d" << d << "k" << k << ":" << r.kernel_dim << "," << r.lambda_min_positive / r.lambda_max << " ";
      o.require(r.kernel_dim == 1, "kernel dimension");
      o.require(r.lambda_min_positive >= 1e-8 * r.lambda_max, "lambda_min+");
    }
}

void t_structure(Outcome& o) {
  struct Case {
    Mesh mesh;
    int k;
  };
  std::vector<Case> cases;
  for (int N : {2, 4, 8})
    for (int k = 2; k <= 3; ++k) {
      cases.push_back({square(N), k});
      cases.push_back({square(N, 0.3, 100 + N), k});
    }
  for (int N : {2, 3}) cases.push_back({sheared_cube(N), 2});
  double consistency = 0, trace = 0, squares = 0;
  for (const Case& c : cases) {
    const FemSystem sys = assemble(c.mesh, c.k);
    const TOperator T = build_t(c.mesh, sys);
    consistency = std::max(consistency, T.consistency_gap);
    const NormalTraceReport nt = normal_trace_check(c.mesh, sys, T);
    trace = std::max(trace, nt.max_abs / nt.scale);
    for (Index n = 0; n < sys.velocity_nodes.size(); ++n) {
      if (sys.velocity_slot[n] < 0 || sys.velocity_nodes.node_class[n] != NodeClass::Vertex) continue;
      for (int comp = 0; comp < sys.dim; ++comp)
        o.require(T.t.row(sys.velocity_dof(n, comp)).cwiseAbs().maxCoeff() == 0.0, "nonzero vertex row");
    }
    for (Index e = 0; e < c.mesh.num_elements(); ++e) {
      const std::vector<bool> ex = excluded_velocity_nodes(sys, e);
      for (std::size_t l = 0; l < ex.size(); ++l)
        if (ex[l])
          o.require(T.element_blocks[e].middleRows(l * sys.dim, sys.dim).cwiseAbs().maxCoeff() == 0.0,
                    "nonzero boundary row");
    }
    squares = std::max(squares, sum_of_squares_gap(c.mesh, sys, T, 20, 7));
  }
  o.detail << cases.size() << " meshes, consistency " << consistency << ", trace " << trace << ", squares "
           << squares;
  o.require(consistency <= 1e-10, "consistency");
  o.require(trace <= 1e-12, "normal trace");
  o.require(squares <= 1e-11, "sum of squares");
}

void coercivity_series(Outcome& o, const std::vector<Mesh>& meshes, int k, const std::string& label) {
  double c0 = 0, C0 = 0;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    const FemSystem sys = assemble(meshes[i], k);
    const CoercivityReport r = coercivity_check(meshes[i], sys, build_t(meshes[i], sys));
    o.detail << label << " c_T=" << r.c_t << " C_T=" << r.C_t << "; ";
    if (i == 0) {
      c0 = r.c_t;
      C0 = r.C_t;
      o.require(c0 > 0, label + " c_T not positive");
    } else {
      o.require(r.c_t >= 0.5 * c0, label + " c_T decay");
      o.require(r.C_t <= 2.0 * C0, label + " C_T growth");
    }
  }
}

void coercivity(Outcome& o) {
  for (int k = 2; k <= 3; ++k)
    coercivity_series(o, {square(2), square(4), square(8)}, k, "square k=" + std::to_string(k));
  coercivity_series(o, {sheared_cube(2), sheared_cube(3)}, 2, "cube k=2");
}

void infsup(Outcome& o) {
  using Solver = InfSupResult (*)(const FemSystem&);
  const std::vector<std::pair<const char*, Solver>> constants{
      {"beta", infsup_classical}, {"gamma", infsup_bp}, {"delta", infsup_meshdep}};
  for (int k = 2; k <= 3; ++k) {
    std::vector<FemSystem> systems;
    for (int N : {2, 4, 8}) systems.push_back(assemble(square(N), k));
    for (const auto& [name, solve] : constants) {
      double first = 0, prev = 0;
      o.detail << name << " k=" << k << ":";
      for (std::size_t i = 0; i < systems.size(); ++i) {
        const InfSupResult r = solve(systems[i]);
        o.detail << " " << r.value;
        o.require(r.value > 0, std::string(name) + " not positive");
        const double mean = std::abs(systems[i].pr_ones.dot(systems[i].pr_l2 * r.mode));
        o.require(mean <= 1e-10, std::string(name) + " mode mean");
        if (i == 0) first = r.value;
        if (i > 0) {
          o.require(r.value <= 2 * prev && r.value >= 0.5 * prev, std::string(name) + " level ratio");
          o.require(r.value >= 1e-2 * first, std::string(name) + " collapse");
        }
        prev = r.value;
      }
      o.detail << "; ";
    }
  }
  // Positivity on the remaining valid test meshes.
  for (const Mesh& m : {square(4, 0.3, 11), sheared_cube(2), sheared_cube(3)}) {
    const FemSystem sys = assemble(m, 2);
    for (const auto& [name, solve] : constants) o.require(solve(sys).value > 0, std::string(name) + " on extra mesh");
  }
}

void structural_bound(Outcome& o) {
  double worst = -1e300;
  for (const Mesh& m : {square(2), square(4, 0.3, 12), square(6, 0.2, 13), sheared_cube(2)}) {
    for (int k = 2; k <= 3; ++k) {
      if (m.dim() == 3 && k == 3) continue;
      const FemSystem sys = assemble(m, k);
      const InfSupResult delta = infsup_meshdep(sys);
      const TOperator T = build_t(m, sys);
      const Eigen::VectorXd v = T.t * delta.mode;
      const double ratio = apply_b(sys, v, delta.mode) /
                           (norm(sys, NormKind::VelocityH1, v) * norm(sys, NormKind::PressureMeshDependent, delta.mode));
      worst = std::max(worst, ratio - delta.value);
      o.require(delta.value >= ratio - 1e-9, "delta below the T ratio");
    }
  }
  o.detail << "max (ratio - delta) " << worst;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "quadrature exactness", 1, quadrature_exactness},
      {2, "cofactor identities", 1, cofactor_identities},
      {3, "counterexample reproduction", 1, counterexample},
      {4, "integrand condition positive cases", 60, condition_positive},
      {5, "Q3 / parallelepiped equivalence", 30, q3_lemma},
      {6, "semi-norm equivalence", 30, seminorm},
      {7, "T operator structure", 120, t_structure},
      {8, "uniform T-coercivity", 300, coercivity},
      {9, "inf-sup constants", 300, infsup},
      {10, "structural bound", 10, structural_bound},
  };
  const int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all = true;
  for (const Criterion& c : criteria) {
    if (only && c.id != only) continue;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs <= c.runtime_limit, "runtime over " + std::to_string(c.runtime_limit) + " s");
    std::printf("criterion %d (%s): %s [%.2f s] %s\n", c.id, c.name, o.pass ? "PASS" : "FAIL", secs,
                o.detail.str().c_str());
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
