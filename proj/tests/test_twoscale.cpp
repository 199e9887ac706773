#include "support.hpp"

#include "thermohom/parallel.hpp"
#include "thermohom/twoscale.hpp"

#include <doctest.h>

#include <sstream>

using namespace thermohom;
using namespace thermohom::testing;

namespace {

double max_abs_diff(const Vector& a, const Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_SUITE("twoscale") {

TEST_CASE("constant temperature is a steady state of the static cell") {
  ModelSetup m = small_setup(true);
  m.theta0.profile = InitialTemperature::Profile::Constant;
  m.theta0.mean = 1.5;
  TwoScaleSolver s(m);
  const auto res = s.run();
  for (const auto& th : res.theta_history) CHECK(max_abs_diff(th, Vector::Constant(th.size(), 1.5)) < 1e-10);
  for (const auto& u : res.u_history) CHECK(u.lpNorm<Eigen::Infinity>() < 1e-10);
  const auto& mask = s.cell().vertex_mask(Phase::B);
  for (const auto& mic : res.final_state.micro)
    for (std::size_t v = 0; v < mask.size(); ++v)
      if (mask[v]) CHECK(std::abs(mic.theta(v) - 1.5) < 1e-10);
  CHECK(std::abs(res.reports.back().theta_B_mean - 1.5) < 1e-10);
}

TEST_CASE("heat content is conserved without sources and dissipation") {
  ModelSetup m = small_setup(true);
  m.material.gamma = {0.0, 0.0};
  m.T = 0.5;
  m.dt = 0.05;
  TwoScaleSolver s(m);
  const auto res = s.run();
  REQUIRE(res.reports.size() == 11);
  for (std::size_t k = 1; k < res.reports.size(); ++k) {
    const double a = res.reports[k - 1].total_content, b = res.reports[k].total_content;
    CHECK(std::abs(b - a) <= 1e-10 * std::abs(a));
  }
  // The initial profile is not a steady state, so the run is not trivially constant.
  CHECK(std::abs(res.reports.back().theta_A_L2 - res.reports.front().theta_A_L2) > 1e-4);
}

TEST_CASE("decoupled heat ignores mechanical loads bitwise") {
  ModelSetup m = decoupled(small_setup(false));
  TwoScaleSolver a(m);
  const auto ra = a.run();
  m.sources.f_u[0] = Vec::Constant(2, 1.0);
  m.sources.f_u[1] = Vec::Constant(2, -0.5);
  TwoScaleSolver b(m);
  const auto rb = b.run();
  REQUIRE(ra.theta_history.size() == rb.theta_history.size());
  for (std::size_t k = 0; k < ra.theta_history.size(); ++k) CHECK(ra.theta_history[k] == rb.theta_history[k]);
  CHECK(rb.u_history.back().norm() > 1e-3);
  CHECK(ra.u_history.back().norm() < 1e-12);
}

TEST_CASE("step count, horizon and initial report") {
  ModelSetup m = small_setup(true);
  m.T = 0.12;
  m.dt = 0.05;
  CHECK(m.steps() == 3);
  CHECK(m.time(3) == doctest::Approx(0.12));
  TwoScaleSolver s(m);
  const auto res = s.run();
  REQUIRE(res.reports.size() == 4);
  CHECK(res.reports.back().t == doctest::Approx(0.12));
  CHECK(res.reports.front().iterations == 0);
  for (const auto& r : res.reports) CHECK(r.trace_defect < 1e-12);
  ModelSetup z = small_setup(true);
  z.T = 0.0;
  TwoScaleSolver s0(z);
  const auto r0 = s0.run();
  CHECK(r0.reports.size() == 1);
  CHECK(r0.theta_history.size() == 1);
}

TEST_CASE("micro heat relaxes toward the trace value") {
  ModelSetup m = decoupled(small_setup(true));
  TwoScaleSolver s(m);
  TwoScaleState st = s.initial_state();
  MicroState prev = st.micro[0];
  prev.theta.setZero();
  prev.mass_theta.setZero();
  prev.dissipation.setZero();
  const MicroResult r = s.micro_solve(0, 0.0, 0.05, 1.0, Vec::Zero(2), prev);
  const auto& mask = s.cell().vertex_mask(Phase::B);
  for (std::size_t v = 0; v < mask.size(); ++v)
    if (mask[v]) {
      CHECK(r.state.theta(v) >= -1e-12);
      CHECK(r.state.theta(v) <= 1.0 + 1e-12);
    }
  CHECK(r.unit_content > 0.0);
  CHECK(r.state.heat_content == doctest::Approx(r.homogeneous_content + r.unit_content).epsilon(1e-12));
}

TEST_CASE("implicit Euler is first order in time") {
  auto final_theta = [](double dt) {
    ModelSetup m = small_setup(true);
    m.T = 0.2;
    m.dt = dt;
    TwoScaleSolver s(m);
    return s.run().theta_history.back();
  };
  const Vector ref = final_theta(0.2 / 32);
  const double e1 = (final_theta(0.05) - ref).norm();
  const double e2 = (final_theta(0.025) - ref).norm();
  const double e3 = (final_theta(0.0125) - ref).norm();
  // Errors against a dt / 32 reference halve with dt.
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.25));
  CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("results do not depend on the worker count") {
  const ModelSetup m = small_setup(false);
  set_worker_count(1);
  TwoScaleSolver a(m);
  const auto ra = a.run();
  set_worker_count(3);
  TwoScaleSolver b(m);
  const auto rb = b.run();
  set_worker_count(1);
  CHECK(ra.theta_history.back() == rb.theta_history.back());
  CHECK(ra.u_history.back() == rb.u_history.back());
  std::ostringstream ca, cb;
  write_diagnostics_csv(ca, ra.reports);
  write_diagnostics_csv(cb, rb.reports);
  CHECK(ca.str() == cb.str());
}

TEST_CASE("micro points carry the macro quadrature") {
  ModelSetup m = small_setup(true);
  TwoScaleSolver s(m);
  double w = 0.0;
  for (const auto& p : s.micro_points()) {
    w += p.weight;
    double b = 0.0;
    for (int a = 0; a < 3; ++a) b += p.beta[a];
    CHECK(b == doctest::Approx(1.0));
  }
  CHECK(w == doctest::Approx(1.0).epsilon(1e-13));
  m.micro_per_element = true;
  TwoScaleSolver d(m);
  CHECK(d.micro_points().size() == d.macro_mesh().cells.size());
}

}
