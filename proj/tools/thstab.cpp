#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thstab/condition.hpp"
#include "thstab/error.hpp"
#include "thstab/gauss_lobatto.hpp"
#include "thstab/mesh_io.hpp"
#include "thstab/random.hpp"
#include "thstab/study.hpp"
#include "thstab/t_operator.hpp"

namespace {

using thstab::Error;
using thstab::ErrorKind;
using thstab::RunConfig;

struct Options {
  RunConfig cfg;
  std::string quad_mode = "gauss_lobatto_kp1";
  int N = 0;
};

void add_common(CLI::App* cmd, Options& o, bool mesh_options) {
  cmd->add_option("--k", o.cfg.ks, "Taylor-Hood degree(s)")->delimiter(',');
  cmd->add_option("--seed", o.cfg.seed, "RNG seed");
  cmd->add_option("--out", o.cfg.out, "Output path (stdout if omitted)");
  cmd->add_option("--format", o.cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  if (!mesh_options) return;
  cmd->add_option("--mesh-kind", o.cfg.mesh_kind, "Mesh family")
      ->check(CLI::IsMember({"quad2d", "hex3d", "counterexample"}));
  cmd->add_option("--mesh-file", o.cfg.mesh_file, "Mesh JSON file");
  cmd->add_option("--N", o.N, "Subdivisions per axis");
  cmd->add_option("--theta", o.cfg.theta, "Interior vertex jitter in units of h/2 (2D)");
  cmd->add_option("--shear", o.cfg.shear, "Shear x1 += shear * x2");
  cmd->add_option("--tol-membership", o.cfg.tol_membership, "Degree membership tolerance");
  cmd->add_option("--quad-mode", o.quad_mode, "Assembly quadrature")
      ->check(CLI::IsMember({"gauss_lobatto_kp1", "reference_high_order"}));
  cmd->add_flag("--h1-seminorm", o.cfg.h1_seminorm, "Use |v|_1 instead of the full H1 norm");
}

void resolve(Options& o, const std::string& command) {
  o.cfg.command = command;
  o.cfg.quad_mode = thstab::quad_mode_from_string(o.quad_mode);
  if (o.N > 0) o.cfg.levels = {o.N};
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + cfg.out);
  f << text;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// Remainder of the n-point Gauss-Lobatto rule for x^{2n-2} on [0,1].
double lobatto_remainder(int n) {
  double r = n * std::pow(n - 1.0, 3) / (2.0 * n - 1);
  for (int i = 1; i <= n - 2; ++i) r *= std::pow(i, 4);
  for (int i = 1; i <= 2 * n - 2; ++i) r /= double(i) * i;
  return r;
}

int cmd_quad_check(const RunConfig& cfg) {
  const int k = cfg.ks.front();
  if (k < 2 || k > 8) throw Error(ErrorKind::InvalidArgument, "quad-check needs 2 <= k <= 8");
  const auto rule = thstab::gauss_lobatto_rule<double>(k + 1);
  std::ostringstream out;
  out << "# thstab " << thstab::kVersion << " quad-check k=" << k << " points=" << k + 1 << "\n";
  int status = 0;
  for (int p = 0; p <= 2 * k; ++p) {
    const double approx = rule.integrate([p](double x) { return std::pow(x, p); });
    const double exact = 1.0 / (p + 1);
    const double rel = std::abs(approx - exact) / exact;
    bool ok = true;
    out << "x^" << p << " quad=" << thstab::format_number(approx) << " exact=" << thstab::format_number(exact)
        << " rel_err=" << thstab::format_number(rel);
    if (p <= 2 * k - 1) {
      ok = rel <= 1e-12;
      out << " expect=exact";
    } else {
      // Beyond the exactness degree the error must be the analytic remainder.
      const double expected = lobatto_remainder(k + 1);
      ok = std::abs((approx - exact) - expected) <= 1e-6 * expected;
      out << " expect=remainder(" << thstab::format_number(expected) << ")";
    }
    out << (ok ? " ok" : " FAIL") << "\n";
    if (!ok && status == 0) {
      std::cerr << "first failing monomial: x^" << p << "\n";
      status = thstab::exit_code(ErrorKind::Numerical);
    }
  }
  emit(cfg, out.str());
  return status;
}

int cmd_condition(const RunConfig& cfg) {
  const int k = cfg.ks.front();
  const thstab::Mesh mesh = thstab::make_mesh(cfg, cfg.levels.front());
  nlohmann::json elements = nlohmann::json::array();
  bool holds = true;
  for (thstab::Index e = 0; e < mesh.num_elements(); ++e) {
    const thstab::ConditionReport r = thstab::check_condition(mesh.map(e), k, 500, cfg.seed, cfg.tol_membership);
    nlohmann::json j = to_json(r);
    j["element"] = e;
    if (mesh.dim() == 3) {
      const thstab::Q3Report q3 = thstab::check_q3_equivalence(mesh.map(e), cfg.tol_membership);
      j["q3_holds"] = q3.q3_holds;
      j["all_faces_parallelograms"] = q3.all_faces_parallelograms;
    }
    holds = holds && r.holds();
    elements.push_back(j);
  }
  nlohmann::json report{{"version", thstab::kVersion}, {"config", to_json(cfg)}, {"elements", elements},
                        {"condition_holds", holds}};
  if (cfg.mesh_kind == "counterexample" && cfg.mesh_file.empty()) {
    const thstab::CounterexampleGap g = thstab::counterexample_gap();
    report["counterexample_gap"] = {{"exact", g.exact}, {"gauss_lobatto", g.gauss_lobatto}, {"gap", g.gap}};
  }
  emit(cfg, dump(report));
  return holds ? 0 : thstab::exit_code(ErrorKind::ConditionViolation);
}

int cmd_study(const RunConfig& cfg) {
  const std::vector<thstab::ConstantRow> rows = thstab::run_study(cfg);
  if (cfg.format == "json") {
    emit(cfg, dump(thstab::rows_to_json(cfg, rows)));
  } else {
    std::ostringstream os;
    thstab::write_csv(os, cfg, rows);
    emit(cfg, os.str());
  }
  return 0;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& M) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) f << (j ? "," : "") << thstab::format_number(M(i, j));
    f << "\n";
  }
}

int cmd_matrices(const RunConfig& cfg) {
  if (cfg.out.empty()) throw Error(ErrorKind::InvalidArgument, "matrices needs --out <directory>");
  const thstab::Mesh mesh = thstab::make_mesh(cfg, cfg.levels.front());
  thstab::AssemblyOptions opts;
  opts.quadrature = cfg.quad_mode;
  opts.h1_seminorm = cfg.h1_seminorm;
  const thstab::FemSystem sys = thstab::assemble(mesh, cfg.ks.front(), opts);
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);
  write_matrix(dir / "B.csv", sys.b);
  write_matrix(dir / "A_H1.csv", sys.vel_h1);
  write_matrix(dir / "A_L2.csv", sys.vel_l2);
  write_matrix(dir / "M_L2.csv", sys.pr_l2);
  write_matrix(dir / "M_grad.csv", sys.pr_grad);
  write_matrix(dir / "M_h.csv", sys.pr_meshdep);
  std::ofstream meta(dir / "config.json", std::ios::binary);
  meta << dump({{"version", thstab::kVersion}, {"config", to_json(cfg)}});
  return 0;
}

int cmd_t_audit(const RunConfig& cfg) {
  const thstab::Mesh mesh = thstab::make_mesh(cfg, cfg.levels.front());
  thstab::AssemblyOptions opts;
  opts.quadrature = cfg.quad_mode;
  const thstab::FemSystem sys = thstab::assemble(mesh, cfg.ks.front(), opts);
  const thstab::TOperator T = thstab::build_t(mesh, sys);
  thstab::Rng rng(cfg.seed);
  Eigen::VectorXd q(sys.num_pressure_dofs());
  for (Eigen::Index i = 0; i < q.size(); ++i) q[i] = rng.uniform(-1.0, 1.0);
  const thstab::NormalTraceReport nt = thstab::normal_trace_check(mesh, sys, T);
  nlohmann::json report{{"version", thstab::kVersion},
                        {"config", to_json(cfg)},
                        {"normal_trace_max", nt.max_abs},
                        {"normal_trace_scale", nt.scale},
                        {"sum_of_squares_gap", thstab::sum_of_squares_gap(mesh, sys, T, 20, cfg.seed)},
                        {"audit", thstab::t_audit(mesh, sys, T, q)}};
  emit(cfg, dump(report));
  return 0;
}

int cmd_mesh_gen(const RunConfig& cfg) {
  emit(cfg, dump(thstab::mesh_to_json(thstab::make_mesh(cfg, cfg.levels.front()))));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Taylor-Hood Q_k-Q_{k-1} stability verification toolkit"};
  app.set_version_flag("--version", thstab::kVersion);
  app.require_subcommand(1);

  Options o;
  auto* quad = app.add_subcommand("quad-check", "Gauss-Lobatto exactness for per-axis monomials");
  add_common(quad, o, false);
  auto* cond = app.add_subcommand("condition", "Check the integrand condition element by element");
  add_common(cond, o, true);
  auto* study = app.add_subcommand("study", "Constants versus refinement level");
  add_common(study, o, true);
  study->add_option("name", o.cfg.study, "Study")->required()->check(CLI::IsMember(thstab::kStudies));
  study->add_option("--levels", o.cfg.levels, "Refinement levels N")->delimiter(',');
  auto* mats = app.add_subcommand("matrices", "Export dense B and Gram matrices as CSV");
  add_common(mats, o, true);
  auto* audit = app.add_subcommand("t-audit", "Dump the nodal assignments of the T operator");
  add_common(audit, o, true);
  auto* gen = app.add_subcommand("mesh-gen", "Write a generated mesh as JSON");
  add_common(gen, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (o.cfg.ks.empty() || o.cfg.levels.empty()) throw Error(ErrorKind::InvalidArgument, "empty --k or --levels");
    const CLI::App* cmd = app.get_subcommands().front();
    resolve(o, cmd->get_name());
    if (cmd == quad) return cmd_quad_check(o.cfg);
    if (cmd == cond) return cmd_condition(o.cfg);
    if (cmd == study) return cmd_study(o.cfg);
    if (cmd == mats) return cmd_matrices(o.cfg);
    if (cmd == audit) return cmd_t_audit(o.cfg);
    return cmd_mesh_gen(o.cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return thstab::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
}
