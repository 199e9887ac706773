#include "thermohom/effective.hpp"
#include "thermohom/output.hpp"
#include "thermohom/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace thermohom {

const char* interpretation_name(Interpretation i) { return i == Interpretation::Stated ? "stated" : "derived"; }

Interpretation parse_interpretation(const std::string& s) {
  if (s == "stated") return Interpretation::Stated;
  if (s == "derived") return Interpretation::Derived;
  throw Error("unknown interpretation '" + s + "' (expected stated or derived)");
}

namespace {

// Sum over the quadrature points of cell c of w * f(q).
template <class T, class Fn>
T cell_integral(const P1Space& space, std::size_t c, Fn&& f) {
  T s = f(0);
  for (int q = 1; q < space.nq(); ++q) s += f(q);
  return s * space.qp_weight(c);
}

void check_match(const CellSolution& sol) {
  const auto& f = sol.field;
  const auto& c = sol.correctors;
  if (f.t != c.t || f.x.size() != c.x.size() || (f.x.size() > 0 && f.x != c.x))
    throw Error("correctors were solved at a different (t, x) than the coefficient field");
}

}  // namespace

void compute_effective_mechanics(const CellContext& ctx, const CellSolution& sol, EffectiveCoefficients& out) {
  check_match(sol);
  const int d = ctx.dim();
  const P1Space& sp = ctx.space();
  const Mesh& m = ctx.mesh();
  const CellField& f = sol.field;
  const Correctors& cor = sol.correctors;
  const int np = sym_pair_count(d);
  out.t = f.t;
  out.x = f.x;
  out.dim = d;

  Eigen::MatrixXd Cp = Eigen::MatrixXd::Zero(np, np);
  Mat alpha = Mat::Zero(d, d);
  Vec fu = zero_vec(d);
  std::vector<Mat> strain(np);
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    fu += cell_integral<Vec>(sp, c, [&](int q) { return f.at(c, q).f_u; });
    if (m.phase[c] != Phase::A) continue;
    const Tensor4 Cbar = cell_integral<Tensor4>(sp, c, [&](int q) { return f.at(c, q).C; });
    for (int p = 0; p < np; ++p) strain[p] = unit_strain(d, p) + sym(sp.grad_vector(c, cor.tau_u[p]));
    for (int p = 0; p < np; ++p) {
      const Mat s = contract(Cbar, strain[p]);
      for (int q = 0; q < np; ++q) Cp(p, q) += double_dot(s, strain[q]);
    }
    const Mat et = sym(sp.grad_vector(c, cor.tau_u_theta));
    alpha += cell_integral<Mat>(sp, c, [&](int q) { return f.at(c, q).alpha; }) - contract(Cbar, et);
  }
  out.C_eff = zero_tensor(d);
  for (int p = 0; p < np; ++p)
    for (int q = 0; q < np; ++q) {
      const auto [i, j] = sym_pair(d, p);
      const auto [k, l] = sym_pair(d, q);
      const double v = Cp(p, q);
      at(out.C_eff, d, i, j, k, l) = v;
      at(out.C_eff, d, j, i, k, l) = v;
      at(out.C_eff, d, i, j, l, k) = v;
      at(out.C_eff, d, j, i, l, k) = v;
    }
  out.alpha_eff = alpha;
  out.f_u_eff = fu;
  out.H_eff = zero_vec(d);
  for (std::size_t i = 0; i < m.interface.size(); ++i) out.H_eff += f.facet[i].Hn * m.interface[i].measure;
  out.Y_A_measure = f.measure_A;
  out.Y_B_measure = f.measure_B;
}

void compute_effective_heat(const CellContext& ctx, const CellSolution& sol, const MaterialParams& mat,
                            const EffectiveOptions& opt, EffectiveCoefficients& out) {
  check_match(sol);
  const int d = ctx.dim();
  const P1Space& sp = ctx.space();
  const Mesh& m = ctx.mesh();
  const CellField& f = sol.field;
  const Correctors& cor = sol.correctors;
  const int np = sym_pair_count(d);
  const bool stated = opt.interpretation == Interpretation::Stated;
  out.t = f.t;
  out.x = f.x;
  out.dim = d;

  Mat K = Mat::Zero(d, d);
  Mat gamma = Mat::Zero(d, d);
  double content = 0.0, theta_term = 0.0, ftheta = 0.0;
  std::vector<double> pair_term(np, 0.0);
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    ftheta += cell_integral<double>(sp, c, [&](int q) { return f.at(c, q).f_theta; });
    if (m.phase[c] != Phase::A) continue;
    const Mat Kbar = cell_integral<Mat>(sp, c, [&](int q) { return f.at(c, q).K; });
    const Mat gbar = cell_integral<Mat>(sp, c, [&](int q) { return f.at(c, q).gamma; });
    std::vector<Vec> g(d);
    for (int j = 0; j < d; ++j) g[j] = sp.grad_scalar(c, cor.tau_theta[j]) + Vec::Unit(d, j);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) K(i, j) += (Kbar * g[j]).dot(g[i]);
    gamma += gbar;
    content += cell_integral<double>(sp, c, [&](int q) { return f.at(c, q).c; });
    const Mat Gt = sp.grad_vector(c, cor.tau_u_theta);
    const double vol = sp.volume(c);
    theta_term += stated ? mat.alpha[0] * Gt.trace() * vol : double_dot(gbar, Gt);
    for (int p = 0; p < np; ++p) {
      const Mat Gp = sp.grad_vector(c, cor.tau_u[p]);
      pair_term[p] += stated ? mat.gamma[0] * Gp.trace() * vol : double_dot(gbar, Gp);
    }
  }
  for (int p = 0; p < np; ++p) {
    const auto [j, k] = sym_pair(d, p);
    gamma(j, k) += pair_term[p];
    if (j != k) gamma(k, j) += pair_term[p];
  }
  if (stated) gamma += mat.gamma[1] * f.measure_B * Mat::Identity(d, d);

  out.K_eff = K;
  out.c_eff = (stated ? mat.rho[0] * mat.cd[0] * f.measure_A : content) + theta_term;
  out.gamma_eff = gamma;
  double w = 0.0;
  for (std::size_t i = 0; i < m.interface.size(); ++i) w += f.facet[i].W * m.interface[i].measure;
  out.W_eff = (opt.latent_heat_in_Weff ? mat.L : 1.0) * w;
  out.f_theta_eff = ftheta;
  out.Y_A_measure = f.measure_A;
  out.Y_B_measure = f.measure_B;
}

EffectiveCoefficients compute_effective(const CellContext& ctx, const CellSolution& sol, const MaterialParams& mat,
                                        const EffectiveOptions& opt) {
  EffectiveCoefficients e;
  compute_effective_mechanics(ctx, sol, e);
  compute_effective_heat(ctx, sol, mat, opt, e);
  return e;
}

std::vector<Vec> probe_vectors(int d, int count, unsigned seed) {
  std::vector<Vec> out;
  for (int i = 0; i < d; ++i) out.push_back(Vec::Unit(d, i));
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  while (static_cast<int>(out.size()) < d + count) {
    Vec q(d);
    for (int i = 0; i < d; ++i) q(i) = u(gen);
    const double n = q.norm();
    if (n > 1e-3) out.push_back(q / n);
  }
  return out;
}

EffectiveCheck check_effective(const EffectiveCoefficients& e, const CellContext& ctx, const CellField& field,
                               double tol) {
  EffectiveCheck r;
  const int d = e.dim;
  auto fail = [&](const std::string& what) {
    r.ok = false;
    r.failures.push_back(what);
  };
  const double cscale = std::max(1.0, e.C_eff.cwiseAbs().maxCoeff());
  r.C_minor_defect = minor_symmetry_defect(e.C_eff) / cscale;
  r.C_major_defect = major_symmetry_defect(e.C_eff) / cscale;
  r.C_min_eig = min_mandel_eigenvalue(e.C_eff);
  if (r.C_minor_defect > tol) fail("C_eff minor symmetry");
  if (r.C_major_defect > tol) fail("C_eff major symmetry");
  if (!(r.C_min_eig > 0.0)) fail("C_eff not positive definite");
  r.K_asymmetry = (e.K_eff - e.K_eff.transpose()).cwiseAbs().maxCoeff() / std::max(1.0, e.K_eff.cwiseAbs().maxCoeff());
  if (r.K_asymmetry > tol) fail("K_eff symmetry");
  const Eigen::MatrixXd Ks = 0.5 * (e.K_eff + e.K_eff.transpose());
  r.K_min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Ks).eigenvalues().minCoeff();
  if (!(r.K_min_eig > 0.0)) fail("K_eff not positive definite");

  const P1Space& sp = ctx.space();
  const Mesh& m = ctx.mesh();
  Mat KA = Mat::Zero(d, d);
  for (std::size_t c = 0; c < m.cells.size(); ++c)
    if (m.phase[c] == Phase::A) KA += cell_integral<Mat>(sp, c, [&](int q) { return field.at(c, q).K; });
  r.voigt_slack = std::numeric_limits<double>::infinity();
  for (const Vec& q : probe_vectors(d)) r.voigt_slack = std::min(r.voigt_slack, q.dot(KA * q) - q.dot(e.K_eff * q));
  if (r.voigt_slack < -tol) fail("K_eff Voigt bound");
  r.c_eff = e.c_eff;
  if (!(e.c_eff > 0.0)) fail("c_eff not positive");
  return r;
}

EffectiveTable tabulate_effective(CellCache& cache, const std::vector<double>& times, const std::vector<Vec>& points,
                                  const EffectiveOptions& opt) {
  EffectiveTable table;
  table.dim = cache.context().dim();
  const std::size_t np = points.size();
  table.rows.resize(times.size() * np);
  parallel_for(table.rows.size(), [&](std::size_t r) {
    const auto sol = cache.get(times[r / np], points[r % np]);
    table.rows[r] = compute_effective(cache.context(), *sol, cache.material(), opt);
    table.rows[r].t = times[r / np];
    table.rows[r].x = points[r % np];
  });
  return table;
}

std::vector<std::string> effective_csv_header(int d) {
  std::vector<std::string> h{"t"};
  auto idx = [](std::initializer_list<int> ids) {
    std::string s;
    for (int i : ids) s += std::to_string(i + 1);
    return s;
  };
  for (int i = 0; i < d; ++i) h.push_back("x" + idx({i}));
  h.push_back("Y_A");
  h.push_back("Y_B");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) h.push_back("C_eff_" + idx({i, j, k, l}));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h.push_back("alpha_eff_" + idx({i, j}));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h.push_back("K_eff_" + idx({i, j}));
  h.push_back("c_eff");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h.push_back("gamma_eff_" + idx({i, j}));
  for (int i = 0; i < d; ++i) h.push_back("H_eff_" + idx({i}));
  h.push_back("W_eff");
  for (int i = 0; i < d; ++i) h.push_back("f_u_eff_" + idx({i}));
  h.push_back("f_theta_eff");
  return h;
}

std::vector<double> effective_csv_row(const EffectiveCoefficients& e) {
  const int d = e.dim;
  std::vector<double> r{e.t};
  for (int i = 0; i < d; ++i) r.push_back(e.x(i));
  r.push_back(e.Y_A_measure);
  r.push_back(e.Y_B_measure);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) r.push_back(at(e.C_eff, d, i, j, k, l));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r.push_back(e.alpha_eff(i, j));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r.push_back(e.K_eff(i, j));
  r.push_back(e.c_eff);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r.push_back(e.gamma_eff(i, j));
  for (int i = 0; i < d; ++i) r.push_back(e.H_eff(i));
  r.push_back(e.W_eff);
  for (int i = 0; i < d; ++i) r.push_back(e.f_u_eff(i));
  r.push_back(e.f_theta_eff);
  return r;
}

void write_effective_csv(std::ostream& out, const EffectiveTable& table) {
  CsvWriter csv(out, effective_csv_header(table.dim));
  for (const auto& row : table.rows) csv.row(effective_csv_row(row));
}

}  // namespace thermohom
