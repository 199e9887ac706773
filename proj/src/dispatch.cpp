#include "thermohom/cli.hpp"

#include "thermohom/output.hpp"
#include "thermohom/parallel.hpp"
#include "thermohom/reference.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace thermohom {

namespace {

class Artifacts {
public:
  explicit Artifacts(std::string dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  std::string path(const std::string& name) {
    names_.push_back(name);
    return (std::filesystem::path(dir_) / name).string();
  }

  std::ofstream open(const std::string& name) {
    std::ofstream out(path(name));
    if (!out) throw Error("cannot write " + name + " in " + dir_);
    return out;
  }

  const std::vector<std::string>& names() const { return names_; }

private:
  std::string dir_;
  std::vector<std::string> names_;
};

std::string eps_tag(double eps) { return std::to_string(std::lround(1.0 / eps)); }

std::vector<std::string> with_x(const std::vector<std::string>& head, int d, const std::vector<std::string>& tail) {
  std::vector<std::string> h = head;
  for (int i = 0; i < d; ++i) h.push_back("x" + std::to_string(i + 1));
  h.insert(h.end(), tail.begin(), tail.end());
  return h;
}

void run_cell(const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const ModelSetup& m = cfg.model;
  const CellContext ctx(build_cell_mesh(m.radius, m.cell_n, m.dim));
  const Vec x = cfg.resolved_cell_x();
  const CellField field = ctx.sample(m.transformation, m.material, m.sources, cfg.cell_t, x);
  const Correctors cor = solve_correctors(ctx, field);
  write_correctors_vtk(art.path("cell_correctors.vtk"), ctx, cor);
  const MeshQuality q = mesh_quality(ctx.mesh());
  auto out = art.open("cell_summary.csv");
  CsvWriter w(out, with_x({"t"}, m.dim,
                          {"Y_A", "Y_B", "max_relative_residual", "cg_iterations", "vertices", "cells",
                           "interface_facets", "min_aspect", "max_aspect"}));
  std::vector<double> row{cfg.cell_t};
  for (int i = 0; i < m.dim; ++i) row.push_back(x(i));
  row.insert(row.end(), {field.measure_A, field.measure_B, cor.max_relative_residual,
                         static_cast<double>(cor.iterations), static_cast<double>(ctx.mesh().vertices.size()),
                         static_cast<double>(ctx.mesh().cells.size()),
                         static_cast<double>(ctx.mesh().interface.size()), q.min_aspect, q.max_aspect});
  w.row(row);
  log << "cell: correctors solved, max relative residual " << format_double(cor.max_relative_residual) << '\n';
}

int run_effective(const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const ModelSetup& m = cfg.model;
  auto ctx = std::make_shared<const CellContext>(build_cell_mesh(m.radius, m.cell_n, m.dim));
  CellCache cache(ctx, m.transformation, m.material, m.sources, 1e-12, 1e-12);
  const auto times = cfg.resolved_effective_times();
  const auto points = cfg.resolved_effective_points();
  const EffectiveTable table = tabulate_effective(cache, times, points, m.effective);
  {
    auto out = art.open("effective.csv");
    write_effective_csv(out, table);
  }
  CheckReport rep;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& e = table.rows[r];
    const auto sol = cache.get(e.t, e.x);
    const EffectiveCheck chk = check_effective(e, *ctx, sol->field);
    std::string note;
    for (const auto& f : chk.failures) note += (note.empty() ? "" : "; ") + f;
    rep.add("effective_row_" + std::to_string(r) + "[t=" + format_double(e.t) + "]", chk.C_min_eig, 0.0, chk.ok,
            note.empty() ? "symmetry, definiteness and Voigt bound" : note);
  }
  auto out = art.open("effective_checks.txt");
  write_report(out, rep);
  log << "effective: " << table.rows.size() << " rows, " << (rep.all_pass() ? "all checks pass" : "checks failed")
      << '\n';
  return rep.all_pass() ? 0 : 2;
}

void run_macro(const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  TwoScaleSolver solver(cfg.model);
  std::vector<std::string> snapshots;
  const SimulationResult res = solver.run([&](const TwoScaleState& s, const StepReport&) {
    if (cfg.vtk) write_macro_vtk(art.path("macro_step_" + std::to_string(s.step) + ".vtk"), solver, s);
  });
  {
    auto out = art.open("macro_diagnostics.csv");
    write_diagnostics_csv(out, res.reports);
  }
  const int d = cfg.model.dim;
  const Mesh& mesh = solver.macro_mesh();
  auto out = art.open("macro_fields.csv");
  std::vector<std::string> tail{"theta_A"};
  for (int i = 0; i < d; ++i) tail.push_back("u_A" + std::to_string(i + 1));
  CsvWriter w(out, with_x({"vertex"}, d, tail));
  const auto& s = res.final_state;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    std::vector<double> row{static_cast<double>(v)};
    for (int i = 0; i < d; ++i) row.push_back(mesh.vertices[v](i));
    row.push_back(s.theta_A(v));
    for (int i = 0; i < d; ++i) row.push_back(s.u_A(v * d + i));
    w.row(row);
  }
  log << "macro: " << res.reports.size() - 1 << " steps, final heat content "
      << format_double(res.reports.back().heat_content) << '\n';
}

void run_micro(const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const ModelSetup& m = cfg.model;
  auto ctx = std::make_shared<const CellContext>(build_cell_mesh(m.radius, m.cell_n, m.dim));
  std::vector<std::pair<double, NormBundle>> bundles;
  std::vector<double> ratios;
  for (double eps : cfg.eps_list) {
    const EpsilonProblem prob(m, eps, ctx);
    const EpsilonSolution sol = prob.solve();
    const P1Space& sp = prob.space();
    const CsrMatrix M = sp.mass([](std::size_t, int, const Vec&) { return 1.0; });
    auto out = art.open("micro_eps" + eps_tag(eps) + ".csv");
    CsvWriter w(out, {"step", "t", "iterations", "theta_L2", "theta_min", "theta_max", "u_max"});
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
      const Vector& th = sol.theta[k];
      w.row({static_cast<double>(k), sol.times[k], static_cast<double>(sol.iterations[k]),
             std::sqrt(std::max(0.0, th.dot(M * th))), th.minCoeff(), th.maxCoeff(),
             sol.u[k].lpNorm<Eigen::Infinity>()});
    }
    if (cfg.vtk) {
      const Vector& th = sol.theta.back();
      const Vector& u = sol.u.back();
      write_vtk_file(art.path("micro_eps" + eps_tag(eps) + ".vtk"), prob.mesh(),
                     {VtkField{"theta", 1, std::vector<double>(th.data(), th.data() + th.size())},
                      VtkField{"u", m.dim, std::vector<double>(u.data(), u.data() + u.size())}});
    }
    bundles.emplace_back(eps, apriori_norm_bundle(sol));
    ratios.push_back(trace_ratio(sol));
    log << "micro: eps = " << format_double(eps) << " done\n";
  }
  auto out = art.open("micro_norms.csv");
  auto header = norm_bundle_csv_header();
  header.push_back("trace_ratio");
  CsvWriter w(out, header);
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    std::vector<double> row{bundles[i].first};
    for (double v : bundles[i].second.values()) row.push_back(v);
    row.push_back(ratios[i]);
    w.row(row);
  }
}

void run_compare(const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const CompareTable table = two_scale_compare(cfg.eps_list, cfg.model);
  auto out = art.open("compare.csv");
  write_compare_csv(out, table);
  log << "compare: " << table.rows.size() << " rows\n";
}

int run_checks(const RunConfig& cfg, Artifacts& art, std::ostream& log) {
  const ModelSetup& m = cfg.model;
  CheckReport rep;
  const CellMesh cell = build_cell_mesh(m.radius, m.cell_n, m.dim);
  const MeshQuality q = mesh_quality(cell);
  rep.add("cell_mesh_nondegenerate", static_cast<double>(q.degenerate.size()), 0.0, q.degenerate.empty());
  rep.add("cell_mesh_orientation", q.orientation_consistent ? 1.0 : 0.0, 1.0, q.orientation_consistent);
  rep.add("cell_mesh_min_volume", q.min_volume, 0.0, q.min_volume > 0.0);
  rep.add("cell_mesh_max_aspect", q.max_aspect, 10.0, q.max_aspect < 10.0);
  for (double eps : cfg.check_eps) {
    const EpsilonMesh em = build_epsilon_mesh(cell, eps);
    const int expected = static_cast<int>(std::llround(std::pow(em.tiles, m.dim)));
    const int comps = em.inclusion_components();
    rep.add("epsilon_mesh_inclusions[eps=" + format_double(eps) + "]", comps, expected, comps == expected);
  }
  AdmissibilityOptions ao;
  ao.T = std::max(m.T, 1e-12);
  ao.interface_radius = m.radius;
  const AdmissibilityReport adm = validate_admissibility(m.transformation, ao);
  rep.add("admissibility_det_margin", adm.det_margin, 0.0, adm.ok,
          adm.violations.empty() ? "" : adm.violations.front().what);
  rep.add("admissibility_interface_clearance", adm.interface_clearance, 0.0, adm.interface_clearance >= 0.0);
  StructureOptions so;
  so.probes = cfg.probes;
  for (double eps : cfg.check_eps) {
    const CheckReport r = operator_structure_checks(eps, m, cfg.resolved_t_samples(), so);
    rep.lines.insert(rep.lines.end(), r.lines.begin(), r.lines.end());
    log << "checks: operator structure at eps = " << format_double(eps) << " done\n";
  }
  auto out = art.open("checks.txt");
  write_report(out, rep);
  log << (rep.all_pass() ? "checks: all pass\n" : "checks: some checks failed\n");
  return rep.all_pass() ? 0 : 2;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"cell", "effective", "macro", "micro", "compare", "checks"};
  return names;
}

DispatchResult dispatch(const std::string& sub, const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  cfg.validate();
  Artifacts art(out_dir);
  DispatchResult res;
  if (sub == "cell") {
    run_cell(cfg, art, log);
  } else if (sub == "effective") {
    res.status = run_effective(cfg, art, log);
  } else if (sub == "macro") {
    run_macro(cfg, art, log);
  } else if (sub == "micro") {
    run_micro(cfg, art, log);
  } else if (sub == "compare") {
    run_compare(cfg, art, log);
  } else if (sub == "checks") {
    res.status = run_checks(cfg, art, log);
  } else {
    throw Error("unknown subcommand '" + sub + "'");
  }
  res.artifacts = art.names();
  Manifest man;
  man.subcommand = sub;
  man.config_text = cfg.echo();
  man.artifacts = res.artifacts;
  man.entries["cg_tol"] = format_double(cfg.model.cg_tol);
  man.entries["fixed_point_tol"] = format_double(cfg.model.fixed_point_tol);
  man.entries["cell_solver_tol"] = format_double(default_cell_solver().tol);
  man.entries["workers"] = std::to_string(worker_count());
  man.entries["status"] = std::to_string(res.status);
  write_manifest((std::filesystem::path(out_dir) / (sub + "_manifest.txt")).string(), man);
  return res;
}

}  // namespace thermohom
