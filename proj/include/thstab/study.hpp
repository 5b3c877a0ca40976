#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "thstab/mesh.hpp"
#include "thstab/spaces.hpp"
#include "thstab/tensor_poly.hpp"

namespace thstab {

inline constexpr const char* kVersion = "0.1.0";

/// Resolved settings of one run. Serialized into every output header.
struct RunConfig {
  std::string command;
  std::string study;
  std::vector<int> ks{2};
  std::vector<int> levels{2};
  std::string mesh_kind = "quad2d";  // quad2d | hex3d | counterexample
  std::string mesh_file;             // overrides mesh_kind and levels when set
  double theta = 0.0;
  double shear = 0.0;
  std::uint64_t seed = 1;
  QuadratureMode quad_mode = QuadratureMode::GaussLobatto;
  bool h1_seminorm = false;
  double tol_membership = kMembershipTolerance;
  std::string format = "csv";
  std::string out;
};

nlohmann::json to_json(const RunConfig& c);

QuadratureMode quad_mode_from_string(const std::string& name);

/// Mesh for one refinement level of the configured family.
Mesh make_mesh(const RunConfig& c, int N);

int mesh_dimension(const RunConfig& c);

struct ConstantRow {
  std::string study;
  int k = 0;
  int d = 0;
  int N = 0;
  double theta = 0.0;
  std::string constant_name;
  double value = 0.0;
  Index kernel_dim = 0;
  Index n_vel_dofs = 0;
  Index n_pr_dofs = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> mode_norms;  // JSON only
};

inline const std::vector<std::string> kStudies{"tcoercivity", "classical", "bp", "meshdep", "local", "seminorm"};

/// One row per constant per (k, level). Throws thstab::Error on mesh or
/// assumption failures.
std::vector<ConstantRow> run_study(const RunConfig& c);

std::string format_number(double x);

/// '#'-prefixed header with version and config, then the column row.
void write_csv(std::ostream& os, const RunConfig& c, const std::vector<ConstantRow>& rows);

nlohmann::json rows_to_json(const RunConfig& c, const std::vector<ConstantRow>& rows);

}  // namespace thstab
