#include "thstab/study.hpp"

#include <algorithm>
#include <cstdio>

#include "thstab/error.hpp"
#include "thstab/infsup.hpp"
#include "thstab/mesh_io.hpp"
#include "thstab/t_operator.hpp"

namespace thstab {

nlohmann::json to_json(const RunConfig& c) {
  return {{"command", c.command},
          {"study", c.study},
          {"k", c.ks},
          {"levels", c.levels},
          {"mesh_kind", c.mesh_kind},
          {"mesh_file", c.mesh_file},
          {"theta", c.theta},
          {"shear", c.shear},
          {"seed", c.seed},
          {"quad_mode", to_string(c.quad_mode)},
          {"h1_seminorm", c.h1_seminorm},
          {"tol_membership", c.tol_membership},
          {"kernel_threshold", 1e-10},
          {"eigen_offdiag_tol", 1e-12},
          {"format", c.format}};
}

QuadratureMode quad_mode_from_string(const std::string& name) {
  if (name == "gauss_lobatto_kp1") return QuadratureMode::GaussLobatto;
  if (name == "reference_high_order") return QuadratureMode::ReferenceHighOrder;
  throw Error(ErrorKind::InvalidArgument, "unknown quadrature mode '" + name + "'");
}

int mesh_dimension(const RunConfig& c) {
  if (!c.mesh_file.empty()) return read_mesh(c.mesh_file).dim();
  return c.mesh_kind == "quad2d" ? 2 : 3;
}

Mesh make_mesh(const RunConfig& c, int N) {
  if (!c.mesh_file.empty()) return read_mesh(c.mesh_file);
  if (c.mesh_kind == "counterexample") return counterexample_mesh();
  StructuredSpec spec;
  if (c.mesh_kind == "quad2d") {
    spec.kind = StructuredKind::Quad2D;
  } else if (c.mesh_kind == "hex3d") {
    spec.kind = StructuredKind::Parallelepiped3D;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown mesh kind '" + c.mesh_kind + "'");
  }
  spec.subdivisions = N;
  spec.theta = c.theta;
  spec.shear = c.shear;
  spec.seed = c.seed;
  return gen_structured(spec);
}

namespace {

ConstantRow base_row(const RunConfig& c, int k, int d, int N) {
  ConstantRow r;
  r.study = c.study;
  r.k = k;
  r.d = d;
  r.N = N;
  r.theta = c.theta;
  r.seed = c.seed;
  return r;
}

void infsup_rows(const RunConfig& c, const Mesh& mesh, const FemSystem& sys, int N,
                 std::vector<ConstantRow>& rows) {
  InfSupResult res;
  std::string name;
  if (c.study == "classical") {
    res = infsup_classical(sys);
    name = "beta";
  } else if (c.study == "bp") {
    res = infsup_bp(sys);
    name = "gamma";
  } else {
    res = infsup_meshdep(sys);
    name = "delta";
  }
  ConstantRow r = base_row(c, sys.k, mesh.dim(), N);
  r.constant_name = name;
  r.value = res.value;
  r.kernel_dim = res.kernel_dim;
  r.n_vel_dofs = sys.num_velocity_dofs();
  r.n_pr_dofs = sys.num_pressure_dofs();
  if (res.mode.size() > 0) {
    r.mode_norms = {{"l2", norm(sys, NormKind::PressureL2, res.mode)},
                    {"grad", norm(sys, NormKind::PressureGrad, res.mode)},
                    {"meshdep", norm(sys, NormKind::PressureMeshDependent, res.mode)},
                    {"mean", sys.pr_ones.dot(sys.pr_l2 * res.mode)}};
  }
  rows.push_back(r);
}

}  // namespace

std::vector<ConstantRow> run_study(const RunConfig& c) {
  if (std::find(kStudies.begin(), kStudies.end(), c.study) == kStudies.end()) {
    throw Error(ErrorKind::InvalidArgument, "unknown study '" + c.study + "'");
  }
  std::vector<ConstantRow> rows;
  if (c.study == "seminorm") {
    const int d = mesh_dimension(c);
    for (int k : c.ks) {
      const SeminormReport s = seminorm_equivalence(k, d, three_adjacent_interior(d));
      ConstantRow r = base_row(c, k, d, 0);
      r.kernel_dim = s.kernel_dim;
      r.n_pr_dofs = tensor_size(k, d);
      r.constant_name = "lambda_min_positive";
      r.value = s.lambda_min_positive;
      rows.push_back(r);
      r.constant_name = "lambda_max";
      r.value = s.lambda_max;
      rows.push_back(r);
    }
    return rows;
  }
  const std::vector<int> levels = c.mesh_file.empty() ? c.levels : std::vector<int>{0};
  AssemblyOptions opts;
  opts.quadrature = c.quad_mode;
  opts.h1_seminorm = c.h1_seminorm;
  for (int k : c.ks) {
    for (int N : levels) {
      const Mesh mesh = make_mesh(c, N);
      const FemSystem sys = assemble(mesh, k, opts);
      if (c.study == "tcoercivity") {
        const TOperator T = build_t(mesh, sys);
        const CoercivityReport rep = coercivity_check(mesh, sys, T);
        ConstantRow r = base_row(c, k, mesh.dim(), N);
        r.kernel_dim = rep.kernel_dim;
        r.n_vel_dofs = sys.num_velocity_dofs();
        r.n_pr_dofs = sys.num_pressure_dofs();
        r.constant_name = "c_T";
        r.value = rep.c_t;
        rows.push_back(r);
        r.constant_name = "C_T";
        r.value = rep.C_t;
        rows.push_back(r);
      } else if (c.study == "local") {
        double min_h1 = std::numeric_limits<double>::max(), min_l2 = min_h1;
        for (Index e = 0; e < mesh.num_elements(); ++e) {
          min_h1 = std::min(min_h1, infsup_local(mesh, sys, e, LocalNormPair::H1MeshGrad).value);
          min_l2 = std::min(min_l2, infsup_local(mesh, sys, e, LocalNormPair::L2Grad).value);
        }
        ConstantRow r = base_row(c, k, mesh.dim(), N);
        r.kernel_dim = 1;
        r.n_vel_dofs = sys.num_velocity_dofs();
        r.n_pr_dofs = sys.num_pressure_dofs();
        r.constant_name = "local_h1_meshgrad_min";
        r.value = min_h1;
        rows.push_back(r);
        r.constant_name = "local_l2_grad_min";
        r.value = min_l2;
        rows.push_back(r);
      } else {
        infsup_rows(c, mesh, sys, N, rows);
      }
    }
  }
  return rows;
}

std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& os, const RunConfig& c, const std::vector<ConstantRow>& rows) {
  os << "# thstab " << kVersion << "\n";
  os << "# config " << to_json(c).dump() << "\n";
  os << "study,k,d,N,theta,constant_name,value,kernel_dim,n_vel_dofs,n_pr_dofs,seed\n";
  for (const ConstantRow& r : rows) {
    os << r.study << ',' << r.k << ',' << r.d << ',' << r.N << ',' << format_number(r.theta) << ','
       << r.constant_name << ',' << format_number(r.value) << ',' << r.kernel_dim << ',' << r.n_vel_dofs << ','
       << r.n_pr_dofs << ',' << r.seed << '\n';
  }
}

nlohmann::json rows_to_json(const RunConfig& c, const std::vector<ConstantRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const ConstantRow& r : rows) {
    nlohmann::json j{{"study", r.study},
                     {"k", r.k},
                     {"d", r.d},
                     {"N", r.N},
                     {"theta", r.theta},
                     {"constant_name", r.constant_name},
                     {"value", r.value},
                     {"kernel_dim", r.kernel_dim},
                     {"n_vel_dofs", r.n_vel_dofs},
                     {"n_pr_dofs", r.n_pr_dofs},
                     {"seed", r.seed}};
    if (!r.mode_norms.empty()) j["mode_norms"] = r.mode_norms;
    out.push_back(j);
  }
  return {{"version", kVersion}, {"config", to_json(c)}, {"rows", out}};
}

}  // namespace thstab
