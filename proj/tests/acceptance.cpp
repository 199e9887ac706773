// Acceptance gate: one PASS/FAIL line per criterion, every tolerance and
// runtime bound pinned below. Exit status is 0 unless --strict is given and a
// criterion fails.

#include "support.hpp"

#include "thermohom/cli.hpp"
#include "thermohom/output.hpp"
#include "thermohom/parallel.hpp"
#include "thermohom/reference.hpp"

#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace thermohom;
using namespace thermohom::testing;

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-6;
constexpr int kFdSamples = 1000;
constexpr double kFdSeconds = 10.0;

constexpr double kFreezeTol = 1e-10;

constexpr double kStructureTol = 1e-10;
constexpr double kStructureSeconds = 60.0;

// Refined-mesh oracle: identity, r = 0.25, lambda = mu = 1, K = I, n = 64.
constexpr double kOracleC1111 = 1.7953266412594389;
constexpr double kOracleK11 = 0.67206071822021451;
constexpr double kSelfConvTol = 0.01;

constexpr double kOrder = 2.0;
constexpr double kOrderTol = 0.2;
constexpr double kMmsSeconds = 120.0;

constexpr double kOperatorSeconds = 120.0;

constexpr double kUniformFactor = 1.5;
constexpr double kUniformSlack = 1e-8;
constexpr double kUniformSeconds = 600.0;

constexpr double kCompareSeconds = 900.0;

constexpr double kDriftTol = 1e-10;
constexpr int kDriftSteps = 100;

struct Line {
  int id;
  std::string name;
  bool pass;
  std::string detail;
  double seconds;
};

class Timer {
public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ModelSetup standard_setup() { return ModelSetup{}; }

Line kinematics_oracle() {
  Timer timer;
  auto tr = Transformation::radial_growth(2, 0.1, 0.25);
  const double T = 0.5;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int s = 0; s < kFdSamples; ++s) {
    const double t = T * u(rng);
    const Vec x = vec2(u(rng), u(rng)), y = vec2(u(rng), u(rng));
    const auto k = eval_kinematics(tr, t, x, y);
    Mat F(2, 2);
    for (int j = 0; j < 2; ++j) {
      Vec yp = y, ym = y;
      yp(j) += kFdStep;
      ym(j) -= kFdStep;
      F.col(j) = (tr.map(t, x, yp) - tr.map(t, x, ym)) / (2.0 * kFdStep);
    }
    worst = std::max(worst, (k.F - F).norm() / k.F.norm());
  }
  const double sec = timer.seconds();
  return {1, "kinematics_fd_oracle", worst < kFdRelTol && sec < kFdSeconds,
          "max_rel_err=" + fmt("%.3e", worst) + " tol=" + fmt("%.0e", kFdRelTol) + " samples=1000", sec};
}

Line freeze() {
  Timer timer;
  const auto radial = Transformation::radial_growth(2, 0.1, 0.25);
  const auto ident = Transformation::identity(2);
  const MaterialParams mat = MaterialParams::defaults(2);
  double worst = 0.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < 200; ++s) {
    const Vec x = vec2(u(rng), u(rng)), y = vec2(u(rng), u(rng));
    const Phase p = s % 2 ? Phase::B : Phase::A;
    const int i = phase_index(p);
    for (const auto* tr : {&radial, &ident}) {
      const double t = tr == &radial ? 0.0 : 0.37;
      const auto c = transformed_coefficients(*tr, mat, p, t, x, y);
      worst = std::max({worst, (c.C_ref - mat.C[i]).cwiseAbs().maxCoeff(), (c.K_ref - mat.K[i]).cwiseAbs().maxCoeff(),
                        (c.alpha_ref - mat.alpha[i] * identity_mat(2)).cwiseAbs().maxCoeff(),
                        (c.gamma_ref - mat.gamma[i] * identity_mat(2)).cwiseAbs().maxCoeff(),
                        std::abs(c.c_ref - mat.rho[i] * mat.cd[i])});
      // Rates are not frozen by s(0, x, y) = y; only the static map has v = 0.
      if (tr == &ident) worst = std::max(worst, c.v_ref.cwiseAbs().maxCoeff());
    }
  }
  const CellContext ctx(build_cell_mesh(0.25, 16, 2));
  auto eff = [&](const Transformation& tr, double t) {
    const CellField f = ctx.sample(tr, mat, Sources::zero(2), t, vec2(0.5, 0.5));
    const CellSolution sol{f, solve_correctors(ctx, f)};
    return compute_effective(ctx, sol, mat, EffectiveOptions{});
  };
  const auto a = eff(radial, 0.0), b = eff(ident, 0.0), c = eff(ident, 0.4);
  for (const auto* e : {&a, &c}) {
    worst = std::max({worst, (e->C_eff - b.C_eff).cwiseAbs().maxCoeff(), (e->K_eff - b.K_eff).cwiseAbs().maxCoeff(),
                      (e->alpha_eff - b.alpha_eff).cwiseAbs().maxCoeff(),
                      (e->gamma_eff - b.gamma_eff).cwiseAbs().maxCoeff(), std::abs(e->c_eff - b.c_eff),
                      (e->H_eff - b.H_eff).cwiseAbs().maxCoeff()});
  }
  worst = std::max(worst, std::abs(c.W_eff - b.W_eff));
  return {2, "t0_identity_freeze", worst < kFreezeTol,
          "max_abs_diff=" + fmt("%.3e", worst) + " tol=" + fmt("%.0e", kFreezeTol), timer.seconds()};
}

Line effective_structure() {
  Timer timer;
  auto ctx = std::make_shared<const CellContext>(build_cell_mesh(0.25, 16, 2));
  const ModelSetup m = standard_setup();
  CellCache cache(ctx, m.transformation, m.material, m.sources, 1e-12, 1e-12);
  bool ok = true;
  double min_c = 1e300, min_k = 1e300, slack = 1e300, sym = 0.0;
  for (double t : {0.0, 0.25, 0.5}) {
    for (const Vec& x : {vec2(0.5, 0.5), vec2(0.2, 0.8)}) {
      const auto sol = cache.get(t, x);
      const auto e = compute_effective(*ctx, *sol, m.material, m.effective);
      const auto chk = check_effective(e, *ctx, sol->field, kStructureTol);
      ok = ok && chk.ok;
      min_c = std::min(min_c, chk.C_min_eig);
      min_k = std::min(min_k, chk.K_min_eig);
      slack = std::min(slack, chk.voigt_slack);
      sym = std::max({sym, chk.C_minor_defect, chk.C_major_defect, chk.K_asymmetry});
    }
  }
  const double sec = timer.seconds();
  return {3, "effective_tensor_structure", ok && sec < kStructureSeconds,
          "sym_defect=" + fmt("%.2e", sym) + " C_min_eig=" + fmt("%.4f", min_c) + " K_min_eig=" + fmt("%.4f", min_k) +
              " voigt_slack=" + fmt("%.4f", slack) + " probes=canonical+20",
          sec};
}

Line self_convergence() {
  Timer timer;
  const CellContext ctx(build_cell_mesh(0.25, 16, 2));
  const MaterialParams mat = MaterialParams::defaults(2);
  const CellField f = ctx.sample(Transformation::identity(2), mat, Sources::zero(2), 0.0, vec2(0.5, 0.5));
  const CellSolution sol{f, solve_correctors(ctx, f)};
  const auto e = compute_effective(ctx, sol, mat, EffectiveOptions{});
  const double rc = std::abs(e.C_eff(0, 0) / kOracleC1111 - 1.0);
  const double rk = std::abs(e.K_eff(0, 0) / kOracleK11 - 1.0);
  return {4, "effective_self_convergence", rc < kSelfConvTol && rk < kSelfConvTol,
          "C1111 n16=" + fmt("%.6f", e.C_eff(0, 0)) + " n64=" + fmt("%.6f", kOracleC1111) + " rel=" +
              fmt("%.4f", rc) + "; K11 n16=" + fmt("%.6f", e.K_eff(0, 0)) + " n64=" + fmt("%.6f", kOracleK11) +
              " rel=" + fmt("%.4f", rk) + " tol=0.01",
          timer.seconds()};
}

Line fem_orders() {
  Timer timer;
  std::vector<double> ep, ee;
  for (int n : {8, 16, 32, 64}) {
    ep.push_back(poisson_error(n));
    ee.push_back(elasticity_error(n));
  }
  bool ok = true;
  std::string detail = "diffusion orders";
  for (double p : observed_orders(ep)) {
    ok = ok && std::abs(p - kOrder) <= kOrderTol;
    detail += " " + fmt("%.3f", p);
  }
  detail += "; elasticity orders";
  for (double p : observed_orders(ee)) {
    ok = ok && std::abs(p - kOrder) <= kOrderTol;
    detail += " " + fmt("%.3f", p);
  }
  const double sec = timer.seconds();
  return {5, "fem_manufactured_orders", ok && sec < kMmsSeconds, detail, sec};
}

Line operator_structure() {
  Timer timer;
  const ModelSetup m = standard_setup();
  bool ok = true;
  int lines = 0;
  std::string failed;
  for (double eps : {0.5, 0.25}) {
    const CheckReport r = operator_structure_checks(eps, m, {0.0, 0.25, 0.5});
    lines += static_cast<int>(r.lines.size());
    for (const auto& l : r.lines)
      if (!l.pass) failed += " " + l.name;
    ok = ok && r.all_pass();
  }
  const double sec = timer.seconds();
  return {6, "operator_structure", ok && sec < kOperatorSeconds,
          "checks=" + std::to_string(lines) + " eps=1/2,1/4 probes=100" + (failed.empty() ? "" : " failed:" + failed),
          sec};
}

Line eps_uniformity() {
  Timer timer;
  const ModelSetup m = standard_setup();
  auto ctx = std::make_shared<const CellContext>(build_cell_mesh(m.radius, m.cell_n, m.dim));
  auto bundle = [&](double eps) { return apriori_norm_bundle(EpsilonProblem(m, eps, ctx).solve()).values(); };
  const auto a = bundle(0.5), c = bundle(0.125);
  bool ok = true;
  std::string detail;
  const auto names = NormBundle::names();
  for (int i = 0; i < 6; ++i) {
    const bool pass = c[i] <= kUniformFactor * a[i] + kUniformSlack;
    ok = ok && pass;
    detail += std::string(i ? " " : "") + names[i] + "=" + fmt("%.4g", c[i]) + "/" + fmt("%.4g", a[i]) +
              (pass ? "" : "!");
  }
  const double sec = timer.seconds();
  return {7, "apriori_eps_uniformity", ok && sec < kUniformSeconds, "eps=1/8 vs 1/2: " + detail + " factor=1.5", sec};
}

Line two_scale() {
  Timer timer;
  const ModelSetup coupled = standard_setup();
  ModelSetup plain = decoupled(standard_setup());
  plain.transformation = Transformation::identity(2);
  const std::vector<double> eps{0.5, 0.25, 0.125};
  bool ok = true;
  std::string detail;
  for (const auto& [name, m] : {std::pair{"decoupled", plain}, std::pair{"coupled", coupled}}) {
    const CompareTable t = two_scale_compare(eps, m);
    detail += std::string(detail.empty() ? "" : "; ") + name;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      detail += " " + fmt("%.4e", t.rows[i].error_A);
      if (i > 0 && !(t.rows[i].error_A < t.rows[i - 1].error_A)) ok = false;
    }
  }
  const double sec = timer.seconds();
  return {8, "two_scale_convergence", ok && sec < kCompareSeconds, "E_A(1/2,1/4,1/8) " + detail, sec};
}

Line conservation() {
  Timer timer;
  ModelSetup m = standard_setup();
  m.transformation = Transformation::identity(2);
  m.material.gamma = {0.0, 0.0};
  m.dt = 0.05;
  m.T = kDriftSteps * m.dt;
  TwoScaleSolver s(m);
  const auto res = s.run();
  double worst = 0.0;
  for (std::size_t k = 1; k < res.reports.size(); ++k) {
    const double a = res.reports[k - 1].total_content, b = res.reports[k].total_content;
    worst = std::max(worst, std::abs(b - a) / std::abs(a));
  }
  const bool steps = static_cast<int>(res.reports.size()) == kDriftSteps + 1;
  return {9, "heat_content_conservation", steps && worst < kDriftTol,
          "max_rel_drift_per_step=" + fmt("%.3e", worst) + " steps=" + std::to_string(res.reports.size() - 1) +
              " tol=" + fmt("%.0e", kDriftTol),
          timer.seconds()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Line determinism() {
  Timer timer;
  namespace fs = std::filesystem;
  const RunConfig cfg = parse_config_text(
      "[model]\ncell_n = 8\nmacro_n = 8\n[time]\nT = 0.1\ndt = 0.05\n"
      "[reference]\neps = 0.5 0.25\ncheck_eps = 0.5\nprobes = 20\n");
  const fs::path root = fs::temp_directory_path() / "thermohom_acceptance_determinism";
  fs::remove_all(root);
  int compared = 0;
  std::string differ;
  for (const auto& sub : subcommands()) {
    std::ostringstream log;
    std::vector<std::string> artifacts;
    for (int w : {1, 3}) {
      set_worker_count(w);
      artifacts = dispatch(sub, cfg, (root / (sub + std::to_string(w))).string(), log).artifacts;
    }
    set_worker_count(1);
    for (const auto& f : artifacts) {
      const auto ext = fs::path(f).extension();
      if (ext != ".csv" && ext != ".txt") continue;
      ++compared;
      if (slurp(root / (sub + "1") / f) != slurp(root / (sub + "3") / f)) differ += " " + sub + "/" + f;
    }
  }
  fs::remove_all(root);
  return {10, "worker_count_determinism", differ.empty() && compared > 0,
          "artifacts_compared=" + std::to_string(compared) + " workers=1,3" + (differ.empty() ? "" : " differ:" + differ),
          timer.seconds()};
}

}  // namespace

int main(int argc, char** argv) {
  bool strict = false;
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--strict") == 0)
      strict = true;
    else
      only.push_back(std::atoi(argv[i]));
  }
  using Fn = Line (*)();
  const std::vector<Fn> criteria{kinematics_oracle, freeze,     effective_structure, self_convergence,
                                 fem_orders,        operator_structure, eps_uniformity, two_scale,
                                 conservation,      determinism};
  int failed = 0, ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), static_cast<int>(i + 1)) == only.end()) continue;
    Line l;
    try {
      l = criteria[i]();
    } catch (const std::exception& e) {
      l = {static_cast<int>(i + 1), "criterion_" + std::to_string(i + 1), false, std::string("error: ") + e.what(), 0.0};
    }
    ++ran;
    failed += l.pass ? 0 : 1;
    std::printf("%s %2d %s %s runtime=%.1fs\n", l.pass ? "PASS" : "FAIL", l.id, l.name.c_str(), l.detail.c_str(),
                l.seconds);
    std::fflush(stdout);
  }
  std::printf("acceptance: %d/%d pass\n", ran - failed, ran);
  return strict && failed ? 1 : 0;
}
