#include "thstab/condition.hpp"

#include <algorithm>
#include <cmath>

#include "thstab/gauss_lobatto.hpp"
#include "thstab/mesh.hpp"
#include "thstab/random.hpp"
#include "thstab/reference_element.hpp"
#include "thstab/spaces.hpp"

namespace thstab {

namespace {

struct Pair {
  Index l;
  int c;
  Index m;
};

// Integrand values for all pairs at xs (rows: pairs). facet < 0 gives
// phi_l (cof grad psi_m)_c, otherwise phi_l (cof n)_c psi_m on that facet.
Eigen::MatrixXd pair_values(const GeometryMap<double>& G, const TaylorHoodReference& ref,
                            const std::vector<Point<double>>& xs, const std::vector<Pair>& pairs, int facet) {
  const int d = ref.dim;
  Eigen::MatrixXd out(pairs.size(), xs.size());
  for (std::size_t s = 0; s < xs.size(); ++s) {
    const Point<double>& x = xs[s];
    const SmallMatrix<double> cof = cofactor<double>(G.jacobian_matrix(x));
    const BasisTable vt = tabulate(ref.velocity, d, x);
    const BasisTable pt = tabulate(ref.pressure, d, x);
    if (facet < 0) {
      const Eigen::MatrixXd cg = cof * pt.grads;
      for (std::size_t p = 0; p < pairs.size(); ++p)
        out(p, s) = vt.values[pairs[p].l] * cg(pairs[p].c, pairs[p].m);
    } else {
      const double sign = facet_side(facet) == 1 ? 1.0 : -1.0;
      const Eigen::VectorXd cof_n = sign * cof.col(facet_axis(facet));
      for (std::size_t p = 0; p < pairs.size(); ++p)
        out(p, s) = vt.values[pairs[p].l] * cof_n[pairs[p].c] * pt.values[pairs[p].m];
    }
  }
  return out;
}

// Lift facet-local points (d-1 coordinates) onto the reference facet.
std::vector<Point<double>> embed(const std::vector<Point<double>>& pts, int dim, int facet) {
  if (facet < 0) return pts;
  std::vector<Point<double>> out;
  for (const auto& y : pts) {
    Point<double> x(dim);
    for (int i = 0, r = 0; i < dim; ++i) x[i] = i == facet_axis(facet) ? double(facet_side(facet)) : y[r++];
    out.push_back(x);
  }
  return out;
}

}  // namespace

bool ConditionReport::holds() const {
  return volume_member && std::all_of(facet_member.begin(), facet_member.end(), [](bool b) { return b; });
}

ConditionReport check_condition(const GeometryMap<double>& G, int k, int samples, std::uint64_t seed, double tol) {
  const int d = G.dim();
  const TaylorHoodReference ref(d, k);
  const Index nv = ref.velocity_nodes();
  const Index np = ref.pressure_nodes();
  ConditionReport r;
  r.k = k;
  r.dim = d;

  std::vector<Pair> pairs;
  const Index total = d * nv * np;
  r.exhaustive = total <= kFullSweepPairs;
  if (r.exhaustive) {
    for (Index l = 0; l < nv; ++l)
      for (int c = 0; c < d; ++c)
        for (Index m = 0; m < np; ++m) pairs.push_back({l, c, m});
  } else {
    Rng rng(seed);
    for (int s = 0; s < samples; ++s) {
      const Index flat = static_cast<Index>(rng.next() % static_cast<std::uint64_t>(total));
      pairs.push_back({flat / (d * np), static_cast<int>((flat / np) % d), flat % np});
    }
  }
  r.pairs_tested = static_cast<Index>(pairs.size());

  // facet < 0 selects the volume integrand in d variables.
  auto sweep = [&](int facet) {
    const int tester_dim = facet < 0 ? d : d - 1;
    const DegreeTester<double> tester(std::vector<int>(tester_dim, 2 * k - 1), kMembershipSamples, seed);
    const Eigen::MatrixXd grid = pair_values(G, ref, embed(tester.grid_points(), d, facet), pairs, facet);
    const Eigen::MatrixXd smp = pair_values(G, ref, embed(tester.sample_points(), d, facet), pairs, facet);
    bool member = true;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double res = tester.residual(grid.row(p).transpose(), smp.row(p).transpose());
      if (facet < 0) r.max_volume_residual = std::max(r.max_volume_residual, res);
      if (res > tol) {
        member = false;
        if (!r.witness) r.witness = Witness{pairs[p].l, pairs[p].c, pairs[p].m, facet, res};
      }
    }
    return member;
  };

  r.volume_member = sweep(-1);
  for (int f = 0; f < facet_count(d); ++f) r.facet_member.push_back(sweep(f));

  const Eigen::MatrixXd lobatto = element_b(G, k, QuadratureMode::GaussLobatto, true);
  const Eigen::MatrixXd high = element_b(G, k, QuadratureMode::ReferenceHighOrder);
  r.quadrature_gap = (lobatto - high).cwiseAbs().maxCoeff();
  r.quadrature_scale = high.cwiseAbs().maxCoeff();
  return r;
}

nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json j{{"k", r.k},
                   {"dim", r.dim},
                   {"pairs_tested", r.pairs_tested},
                   {"exhaustive", r.exhaustive},
                   {"volume_member", r.volume_member},
                   {"facet_member", r.facet_member},
                   {"max_volume_residual", r.max_volume_residual},
                   {"quadrature_gap", r.quadrature_gap},
                   {"quadrature_scale", r.quadrature_scale},
                   {"holds", r.holds()}};
  if (r.witness) {
    j["witness"] = {{"velocity_node", r.witness->velocity_node},
                    {"component", r.witness->component},
                    {"pressure_node", r.witness->pressure_node},
                    {"facet", r.witness->facet},
                    {"residual", r.witness->residual}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

double counterexample_integrand(const Point<double>& x) {
  static const Mesh mesh = counterexample_mesh();
  const SmallMatrix<double> cof = mesh.map(0).jacobian(x).cof;
  double bubble = 64.0;
  for (int i = 0; i < 3; ++i) bubble *= x[i] * (1.0 - x[i]);
  // grad q = e_1, v = bubble e_3
  return bubble * cof(2, 0);
}

double counterexample_integrand_closed_form(const Point<double>& x) {
  return 4.0 * x[0] * x[0] * (1.0 - x[0]) * (x[0] - 4.0) * x[1] * (1.0 - x[1]) * x[2] * (1.0 - x[2]) * (x[2] - 2.0);
}

CounterexampleGap counterexample_gap() {
  CounterexampleGap g;
  g.exact = integrate_tensor([](const Point<double>& x) { return counterexample_integrand(x); },
                             reference_rule<double>(6, 3));
  g.gauss_lobatto = integrate_tensor([](const Point<double>& x) { return counterexample_integrand(x); },
                                     gauss_lobatto_tensor<double>(3, 3));
  g.gap = std::abs(g.exact - g.gauss_lobatto);
  return g;
}

Q3Report check_q3_equivalence(const GeometryMap<double>& G, double tol) {
  if (G.dim() != 3) throw Error(ErrorKind::InvalidArgument, "Q3 equivalence is a 3D statement");
  Q3Report r;
  r.q3_holds = true;
  for (int col = 0; col < 3; ++col) {
    std::vector<int> degrees(3, 0);
    degrees[col] = 1;
    const DegreeTester<double> tester(degrees);
    for (int comp = 0; comp < 3; ++comp) {
      const bool ok = tester.contains(
          [&](const Point<double>& x) { return cofactor<double>(G.jacobian_matrix(x))(comp, col); }, tol);
      r.q3_holds = r.q3_holds && ok;
    }
  }
  const double h = G.diameter();
  const double face_tol = 1e-12 * h * h;
  const std::vector<std::array<int, 4>> faces{
      {0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4}, {3, 2, 6, 7}, {0, 3, 7, 4}, {1, 2, 6, 5}};
  r.all_faces_parallelograms = true;
  for (const auto& f : faces) {
    const Eigen::Vector3d a = G.vertex(f[0]), b = G.vertex(f[1]), c = G.vertex(f[2]), e = G.vertex(f[3]);
    const bool parallel = (b - a).cross(c - e).norm() <= face_tol && (c - b).cross(e - a).norm() <= face_tol;
    r.all_faces_parallelograms = r.all_faces_parallelograms && parallel;
  }
  return r;
}

}  // namespace thstab
