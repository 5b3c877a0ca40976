#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "thstab/geometry.hpp"
#include "thstab/tensor_poly.hpp"

namespace thstab {

/// Basis pair (velocity node, component, pressure node) whose integrand
/// fails the degree test.
struct Witness {
  Index velocity_node = 0;
  int component = 0;
  Index pressure_node = 0;
  int facet = -1;  // -1 for the volume term
  double residual = 0.0;
};

struct ConditionReport {
  int k = 0;
  int dim = 0;
  Index pairs_tested = 0;
  bool exhaustive = false;
  bool volume_member = true;            // integrand in Q_{2k-1}
  std::vector<bool> facet_member;       // per local facet, degrees 2k-1
  double max_volume_residual = 0.0;
  double quadrature_gap = 0.0;          // max |B_high - B_lobatto| entry
  double quadrature_scale = 0.0;        // max |B_high| entry
  std::optional<Witness> witness;

  bool holds() const;
};

/// Full basis-pair sweep when d (k+1)^d k^d <= kFullSweepPairs, otherwise
/// `samples` seeded random pairs.
inline constexpr Index kFullSweepPairs = 5184;

ConditionReport check_condition(const GeometryMap<double>& G, int k, int samples = 500,
                                std::uint64_t seed = kMembershipSeed, double tol = kMembershipTolerance);

nlohmann::json to_json(const ConditionReport& r);

/// v . cof(J) grad q for v = 64 prod x_i (1 - x_i) e_3 and q = x_1 on the
/// counterexample hexahedron, evaluated through the geometry map.
double counterexample_integrand(const Point<double>& x);

/// The same integrand in its factored closed form.
double counterexample_integrand_closed_form(const Point<double>& x);

struct CounterexampleGap {
  double exact = 0.0;          // high-order Gauss
  double gauss_lobatto = 0.0;  // 3-point Gauss-Lobatto tensor rule
  double gap = 0.0;
};

CounterexampleGap counterexample_gap();

struct Q3Report {
  bool q3_holds = false;
  bool all_faces_parallelograms = false;
};

/// Per-axis degree test of the cofactor columns against the face test of
/// opposite edges being parallel. 3D only.
Q3Report check_q3_equivalence(const GeometryMap<double>& G, double tol = kMembershipTolerance);

}  // namespace thstab
