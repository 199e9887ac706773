#include "thermohom/cli.hpp"
#include "thermohom/output.hpp"
#include "thermohom/parallel.hpp"
#include "thermohom/reference.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace thermohom;

namespace {

Vec to_vec(const Eigen::VectorXd& v) {
  if (v.size() != 2 && v.size() != 3) throw py::value_error("points must have 2 or 3 coordinates");
  return Vec(v);
}

py::dict effective_dict(const EffectiveCoefficients& e) {
  py::dict d;
  d["t"] = e.t;
  d["x"] = Eigen::VectorXd(e.x);
  d["C_eff"] = Eigen::MatrixXd(e.C_eff);
  d["K_eff"] = Eigen::MatrixXd(e.K_eff);
  d["alpha_eff"] = Eigen::MatrixXd(e.alpha_eff);
  d["gamma_eff"] = Eigen::MatrixXd(e.gamma_eff);
  d["c_eff"] = e.c_eff;
  d["H_eff"] = Eigen::VectorXd(e.H_eff);
  d["W_eff"] = e.W_eff;
  d["Y_A"] = e.Y_A_measure;
  d["Y_B"] = e.Y_B_measure;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-scale thermoelastic homogenization in evolving cell geometries";
  m.attr("__version__") = library_version();

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  py::class_<RunConfig>(m, "RunConfig")
      .def_property_readonly("dim", [](const RunConfig& c) { return c.model.dim; })
      .def_property_readonly("radius", [](const RunConfig& c) { return c.model.radius; })
      .def_property_readonly("T", [](const RunConfig& c) { return c.model.T; })
      .def_property_readonly("dt", [](const RunConfig& c) { return c.model.dt; })
      .def_property_readonly("steps", [](const RunConfig& c) { return c.model.steps(); })
      .def_readwrite("eps_list", &RunConfig::eps_list)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def("echo", &RunConfig::echo)
      .def("__repr__", [](const RunConfig& c) {
        std::ostringstream s;
        s << "<RunConfig dim=" << c.model.dim << " radius=" << c.model.radius << " T=" << c.model.T << ">";
        return s.str();
      });

  m.def("parse_config", &parse_config_file, py::arg("path"));
  m.def("parse_config_text", &parse_config_text, py::arg("text"));
  m.def("subcommands", &subcommands);
  m.def("set_workers", &set_worker_count, py::arg("workers"));

  m.def(
      "dispatch",
      [](const std::string& sub, const RunConfig& cfg, const std::string& out_dir) {
        std::ostringstream log;
        DispatchResult r;
        {
          py::gil_scoped_release release;
          r = dispatch(sub, cfg, out_dir, log);
        }
        return py::make_tuple(r.status, r.artifacts, log.str());
      },
      py::arg("subcommand"), py::arg("config"), py::arg("out_dir"),
      "Runs one subcommand; returns (status, artifact names, log).");

  m.def(
      "kinematics",
      [](const RunConfig& cfg, double t, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
        const auto k = eval_kinematics(cfg.model.transformation, t, to_vec(x), to_vec(y));
        return py::make_tuple(Eigen::MatrixXd(k.F), k.J, Eigen::VectorXd(k.v));
      },
      py::arg("config"), py::arg("t"), py::arg("x"), py::arg("y"), "Returns (F, J, v) of the cell transformation.");

  m.def(
      "effective",
      [](const RunConfig& cfg, double t, const Eigen::VectorXd& x) {
        const ModelSetup& s = cfg.model;
        const CellContext ctx(build_cell_mesh(s.radius, s.cell_n, s.dim));
        const CellField f = ctx.sample(s.transformation, s.material, s.sources, t, to_vec(x));
        const CellSolution sol{f, solve_correctors(ctx, f)};
        return effective_dict(compute_effective(ctx, sol, s.material, s.effective));
      },
      py::arg("config"), py::arg("t"), py::arg("x"));

  m.def(
      "run_two_scale",
      [](const RunConfig& cfg) {
        SimulationResult res;
        {
          py::gil_scoped_release release;
          TwoScaleSolver solver(cfg.model);
          res = solver.run();
        }
        py::dict out;
        std::vector<double> t, content, theta_l2;
        for (const auto& r : res.reports) {
          t.push_back(r.t);
          content.push_back(r.total_content);
          theta_l2.push_back(r.theta_A_L2);
        }
        out["t"] = t;
        out["total_content"] = content;
        out["theta_A_L2"] = theta_l2;
        out["theta_A"] = res.theta_history;
        out["u_A"] = res.u_history;
        return out;
      },
      py::arg("config"));

  m.def(
      "norm_bundle",
      [](const RunConfig& cfg, double eps) {
        NormBundle nb;
        {
          py::gil_scoped_release release;
          nb = apriori_norm_bundle(solve_epsilon_problem(eps, cfg.model));
        }
        py::dict out;
        const auto names = NormBundle::names();
        const auto values = nb.values();
        for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = values[i];
        return out;
      },
      py::arg("config"), py::arg("eps"));
}
