#include "thermohom/reference.hpp"

#include "thermohom/output.hpp"
#include "thermohom/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <random>

namespace thermohom {

namespace {

double dot(const Vector& a, const Vector& b) {
  return deterministic_dot(std::span<const double>(a.data(), a.size()), std::span<const double>(b.data(), b.size()));
}

P1Space::Mask phase_mask(const Mesh& m, Phase p) {
  P1Space::Mask mask(m.cells.size(), 0);
  for (std::size_t c = 0; c < m.cells.size(); ++c) mask[c] = m.phase[c] == p;
  return mask;
}

// sum_i u_i^T A u_i over the components of an interleaved vector field.
double component_form(const CsrMatrix& A, const Vector& u, int d) {
  const int nv = A.rows;
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    Vector c(nv);
    for (int v = 0; v < nv; ++v) c(v) = u(v * d + i);
    s += dot(c, A * c);
  }
  return s;
}

bool any_nonzero(const std::array<double, 2>& a) { return a[0] != 0.0 || a[1] != 0.0; }

}  // namespace

EpsilonProblem::EpsilonProblem(ModelSetup setup, double eps, std::shared_ptr<const CellContext> cell)
    : setup_(std::move(setup)), eps_(eps) {
  setup_.validate();
  if (!(eps > 0.0) || eps > 1.0) throw Error("eps must lie in (0, 1]");
  if (!cell) cell = std::make_shared<CellContext>(build_cell_mesh(setup_.radius, setup_.cell_n, setup_.dim));
  if (cell->dim() != setup_.dim) throw Error("cell mesh dimension does not match the model");
  cell_ = std::move(cell);
  scaled_ = scaled_coefficients(setup_.material, eps_);
  mesh_ = std::make_shared<const EpsilonMesh>(build_epsilon_mesh(cell_->mesh(), eps_));
  space_ = std::make_unique<P1Space>(*mesh_);
  mask_A_ = phase_mask(*mesh_, Phase::A);
  mask_B_ = phase_mask(*mesh_, Phase::B);
}

std::vector<std::shared_ptr<const CellField>> EpsilonProblem::fields_at(double t) const {
  const int tiles = static_cast<int>(std::llround(std::pow(mesh_->tiles, setup_.dim)));
  std::vector<std::shared_ptr<const CellField>> out(tiles);
  const Transformation& tr = setup_.transformation;
  if (tr.x_independent()) {
    auto f = std::make_shared<const CellField>(cell_->sample(tr, scaled_, setup_.sources, t, tr.center()));
    std::fill(out.begin(), out.end(), f);
    return out;
  }
  for (int k = 0; k < tiles; ++k)
    out[k] = std::make_shared<const CellField>(
        cell_->sample(tr, scaled_, setup_.sources, t, mesh_->tile_origin(k)));
  return out;
}

EpsilonOperators EpsilonProblem::operators(double t) const {
  const auto fields = fields_at(t);
  const EpsilonMesh& m = *mesh_;
  const P1Space& sp = *space_;
  const double eps = eps_;
  auto qp = [&](std::size_t c, int q) -> const QpCoefficients& {
    return fields[m.cell_tile[c]]->at(m.cell_cell[c], q);
  };
  auto facet = [&](std::size_t i) -> const FacetCoefficients& {
    return fields[m.facet_tile[i]]->facet[m.facet_cell_facet[i]];
  };
  auto c_fn = [&](std::size_t c, int q, const Vec&) { return qp(c, q).c; };
  auto v_fn = [&](std::size_t c, int q, const Vec&) -> Vec { return eps * qp(c, q).v; };
  auto gamma_fn = [&](std::size_t c, int q, const Vec&) { return qp(c, q).gamma; };

  EpsilonOperators op;
  op.t = t;
  op.M = sp.mass(c_fn);
  op.K = sp.diffusion([&](std::size_t c, int q, const Vec&) { return qp(c, q).K; });
  op.Adv = sp.advection(c_fn, v_fn);
  op.Ggamma = sp.coupling(gamma_fn);
  op.Dg = op.Ggamma.transpose();
  op.DgAdv = sp.coupling_advection(gamma_fn, v_fn);
  op.E = sp.elasticity([&](std::size_t c, int q, const Vec&) { return qp(c, q).C; });
  op.G = sp.coupling([&](std::size_t c, int q, const Vec&) { return qp(c, q).alpha; });
  op.F_theta = sp.load_scalar([&](std::size_t c, int q, const Vec&) { return qp(c, q).f_theta; });
  const double latent_factor = setup_.effective.latent_heat_in_Weff ? setup_.material.L : 1.0;
  op.latent = sp.interface_load_scalar(
      [&](std::size_t i, const Vec&, const Vec&) { return eps * latent_factor * facet(i).W; });
  op.F_u = sp.load_vector([&](std::size_t c, int q, const Vec&) { return qp(c, q).f_u; }) +
           sp.interface_load_vector([&](std::size_t i, const Vec&, const Vec&) -> Vec { return eps * facet(i).Hn; });
  return op;
}

ConstraintSet EpsilonProblem::mechanics_constraints() const {
  const int d = setup_.dim;
  const auto outer = mesh_->outer_boundary_mask();
  ConstraintSet cs(static_cast<int>(mesh_->vertices.size()) * d);
  for (std::size_t v = 0; v < outer.size(); ++v)
    if (outer[v])
      for (int i = 0; i < d; ++i) cs.pin(static_cast<int>(v) * d + i, 0.0);
  return cs;
}

Vector EpsilonProblem::initial_temperature() const {
  Vector th(mesh_->vertices.size());
  for (std::size_t v = 0; v < mesh_->vertices.size(); ++v) th(v) = setup_.theta0(mesh_->vertices[v]);
  return th;
}

Vector EpsilonProblem::solve_mechanics(const EpsilonOperators& op, const Vector& theta, const Vector* warm) const {
  const ReducedSystem sys = apply_constraints(op.E, op.G * theta + op.F_u, mechanics_constraints());
  return solve_reduced(sys, setup_.solver(), nullptr, warm);
}

EpsilonSolution EpsilonProblem::solve(
    const std::function<void(int, double, const Vector&, const Vector&)>& observer) const {
  EpsilonSolution sol;
  sol.eps = eps_;
  sol.setup = setup_;
  sol.mesh = mesh_;
  const bool static_coeff = setup_.transformation.is_static() && setup_.sources.table.empty();
  const bool coupled = any_nonzero(setup_.material.alpha) || any_nonzero(setup_.material.gamma);
  const CsrMatrix mass1 = space_->mass([](std::size_t, int, const Vec&) { return 1.0; });
  auto l2 = [&](const Vector& v) { return std::sqrt(std::max(0.0, dot(v, mass1 * v))); };
  const int d = setup_.dim;
  auto l2v = [&](const Vector& u) { return std::sqrt(std::max(0.0, component_form(mass1, u, d))); };

  EpsilonOperators op = operators(0.0);
  Vector theta = initial_temperature();
  Vector u = solve_mechanics(op, theta, nullptr);
  auto record = [&](int step, double t, int iterations) {
    sol.times.push_back(t);
    sol.theta.push_back(theta);
    sol.u.push_back(u);
    sol.iterations.push_back(iterations);
    if (observer) observer(step, t, theta, u);
  };
  record(0, 0.0, 0);

  const int steps = setup_.steps();
  for (int k = 1; k <= steps; ++k) {
    const double t_old = setup_.time(k - 1);
    const double t_new = setup_.time(k);
    const double dt = t_new - t_old;
    const Vector mass_old = op.M * theta;
    const Vector diss_old = op.Dg * u;
    if (!static_coeff) op = operators(t_new);
    const bool lagged = coupled || op.Adv.max_abs() > 0.0 || op.DgAdv.max_abs() > 0.0;
    const CsrMatrix H = add(1.0 / dt, op.M, 1.0, op.K);
    const Vector fixed = mass_old / dt + diss_old / dt + op.F_theta - setup_.latent_sign * op.latent;
    Vector th_it = theta;
    Vector u_it = u;
    int it = 0;
    bool converged = false;
    try {
      while (it < setup_.fixed_point_max_iter) {
        ++it;
        const Vector rhs = fixed - op.Adv * th_it - op.Dg * u_it / dt - op.DgAdv * u_it;
        Vector th_new = solve_spd(H, rhs, setup_.solver());
        double change = l2(th_new - th_it);
        if (coupled) {
          Vector u_new = solve_mechanics(op, th_new, &u_it);
          change += l2v(u_new - u_it);
          u_it = std::move(u_new);
        }
        th_it = std::move(th_new);
        if (!lagged || change < setup_.fixed_point_tol) {
          converged = true;
          break;
        }
      }
      if (!coupled) u_it = solve_mechanics(op, th_it, &u);
    } catch (const Error& e) {
      throw SolverError("eps = " + format_double(eps_) + ", step " + std::to_string(k) + ": " + e.what());
    }
    if (!converged)
      throw SolverError("eps = " + format_double(eps_) + ", step " + std::to_string(k) +
                        ": staggered iteration did not converge");
    theta = std::move(th_it);
    u = std::move(u_it);
    record(k, t_new, it);
  }
  return sol;
}

EpsilonSolution solve_epsilon_problem(double eps, const ModelSetup& setup) {
  return EpsilonProblem(setup, eps).solve();
}

// ------------------------------------------------------------------ norms

std::array<double, 6> NormBundle::values() const {
  return {theta_Linf_L2, grad_theta_A, grad_theta_B, u_Linf_L2, grad_u_A, grad_u_B};
}

std::array<const char*, 6> NormBundle::names() {
  return {"theta_Linf_L2", "grad_theta_L2_A", "eps_grad_theta_L2_B", "u_Linf_L2", "grad_u_Linf_A", "eps_grad_u_Linf_B"};
}

NormBundle norm_bundle(const Mesh& mesh, double eps, const std::vector<double>& times,
                       const std::vector<Vector>& theta, const std::vector<Vector>& u) {
  if (theta.size() != times.size() || u.size() != times.size()) throw Error("norm bundle: history lengths differ");
  const int d = mesh.dim;
  const P1Space sp(mesh);
  auto one = [](std::size_t, int, const Vec&) { return 1.0; };
  auto eye = [d](std::size_t, int, const Vec&) { return identity_mat(d); };
  const CsrMatrix M = sp.mass(one);
  const CsrMatrix KA = sp.diffusion(eye, phase_mask(mesh, Phase::A));
  const CsrMatrix KB = sp.diffusion(eye, phase_mask(mesh, Phase::B));
  NormBundle nb;
  double ga = 0.0, gb = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    nb.theta_Linf_L2 = std::max(nb.theta_Linf_L2, std::sqrt(std::max(0.0, dot(theta[k], M * theta[k]))));
    nb.u_Linf_L2 = std::max(nb.u_Linf_L2, std::sqrt(std::max(0.0, component_form(M, u[k], d))));
    nb.grad_u_A = std::max(nb.grad_u_A, std::sqrt(std::max(0.0, component_form(KA, u[k], d))));
    nb.grad_u_B = std::max(nb.grad_u_B, eps * std::sqrt(std::max(0.0, component_form(KB, u[k], d))));
    if (k == 0) continue;
    const double dt = times[k] - times[k - 1];
    ga += dt * dot(theta[k], KA * theta[k]);
    gb += dt * dot(theta[k], KB * theta[k]);
  }
  nb.grad_theta_A = std::sqrt(std::max(0.0, ga));
  nb.grad_theta_B = eps * std::sqrt(std::max(0.0, gb));
  return nb;
}

NormBundle apriori_norm_bundle(const EpsilonSolution& sol) {
  if (!sol.mesh) throw Error("norm bundle: solution has no mesh");
  return norm_bundle(*sol.mesh, sol.eps, sol.times, sol.theta, sol.u);
}

double interface_l2_squared(const Mesh& mesh, const Vector& theta) {
  const int m = mesh.dim - 1;
  const double factor = 2.0 / ((m + 1) * (m + 2));
  double total = 0.0;
  for (const auto& f : mesh.interface) {
    double sq = 0.0, cross = 0.0;
    for (int i = 0; i < mesh.dim; ++i) {
      const double a = theta(f.v[i]);
      sq += a * a;
      for (int j = i + 1; j < mesh.dim; ++j) cross += a * theta(f.v[j]);
    }
    total += f.measure * factor * (sq + cross);
  }
  return total;
}

double trace_ratio(const EpsilonSolution& sol) {
  const Mesh& mesh = *sol.mesh;
  const P1Space sp(mesh);
  const int d = mesh.dim;
  const CsrMatrix M = sp.mass([](std::size_t, int, const Vec&) { return 1.0; });
  const CsrMatrix K = sp.diffusion([d](std::size_t, int, const Vec&) { return identity_mat(d); });
  double ratio = 0.0;
  for (const Vector& th : sol.theta) {
    const double den = dot(th, M * th) + sol.eps * sol.eps * dot(th, K * th);
    if (den <= 0.0) continue;
    ratio = std::max(ratio, sol.eps * interface_l2_squared(mesh, th) / den);
  }
  return ratio;
}

// ----------------------------------------------------------------- checks

bool CheckReport::all_pass() const {
  return std::all_of(lines.begin(), lines.end(), [](const CheckLine& l) { return l.pass; });
}

void CheckReport::add(std::string name, double value, double threshold, bool pass, std::string note) {
  lines.push_back({std::move(name), value, threshold, pass, std::move(note)});
}

void write_report(std::ostream& out, const CheckReport& report) {
  for (const auto& l : report.lines) {
    out << (l.pass ? "PASS " : "FAIL ") << l.name << " value=" << format_double(l.value)
        << " threshold=" << format_double(l.threshold);
    if (!l.note.empty()) out << " (" << l.note << ")";
    out << '\n';
  }
  out << (report.all_pass() ? "ALL PASS" : "SOME CHECKS FAILED") << '\n';
}

CheckReport operator_structure_checks(double eps, const ModelSetup& setup, const std::vector<double>& t_samples,
                                      const StructureOptions& opt) {
  const EpsilonProblem prob(setup, eps);
  const Mesh& mesh = prob.mesh();
  const P1Space& sp = prob.space();
  const int d = setup.dim;
  const ConstraintSet cs = prob.mechanics_constraints();
  int nr = 0;
  const std::vector<int> map = reduction_map(cs, &nr);
  const int nv = static_cast<int>(mesh.vertices.size());
  auto restrict = [&](const Vector& full) {
    Vector r(nr);
    for (int i = 0; i < static_cast<int>(map.size()); ++i)
      if (map[i] >= 0) r(map[i]) = full(i);
    return r;
  };
  auto expand = [&](const Vector& red) {
    Vector f = Vector::Zero(static_cast<int>(map.size()));
    for (int i = 0; i < static_cast<int>(map.size()); ++i)
      if (map[i] >= 0) f(i) = red(map[i]);
    return f;
  };

  auto eye = [d](std::size_t, int, const Vec&) { return identity_mat(d); };
  const CsrMatrix M1 = sp.mass([](std::size_t, int, const Vec&) { return 1.0; });
  const CsrMatrix KA = sp.diffusion(eye, phase_mask(mesh, Phase::A));
  const CsrMatrix KB = sp.diffusion(eye, phase_mask(mesh, Phase::B));

  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> u_probes(opt.probes), f_probes(opt.probes);
  for (int p = 0; p < opt.probes; ++p) {
    u_probes[p] = Vector(nr);
    for (int i = 0; i < nr; ++i) u_probes[p](i) = normal(rng);
    f_probes[p] = Vector(nv);
    for (int i = 0; i < nv; ++i) f_probes[p](i) = normal(rng);
  }
  SolverOptions sopt = setup.solver();
  sopt.tol = opt.solve_tol;

  CheckReport rep;
  const std::string tag = "[eps=" + format_double(eps) + "]";
  std::vector<double> pair_values;
  double max_quotient = 0.0;
  for (std::size_t ti = 0; ti < t_samples.size(); ++ti) {
    const double t = t_samples[ti];
    const std::string at = tag + "[t=" + format_double(t) + "]";
    const EpsilonOperators op = prob.operators(t);
    const CsrMatrix Er = reduce_matrix(op.E, cs, map);

    rep.add("E_symmetric" + at, Er.asymmetry(), 1e-12, Er.asymmetry() <= 1e-12);
    double min_rq = std::numeric_limits<double>::infinity();
    double min_korn = std::numeric_limits<double>::infinity();
    for (const Vector& x : u_probes) {
      const double e = dot(x, Er * x);
      min_rq = std::min(min_rq, e / dot(x, x));
      const Vector full = expand(x);
      const double h1 = component_form(KA, full, d) + eps * eps * component_form(KB, full, d);
      min_korn = std::min(min_korn, e / h1);
    }
    rep.add("E_min_rayleigh" + at, min_rq, 0.0, min_rq > 0.0, std::to_string(opt.probes) + " random constrained vectors");
    rep.add("korn_ratio" + at, min_korn, 0.0, min_korn > 0.0, "<E u,u> / (|grad u|_A^2 + eps^2 |grad u|_B^2)");

    double min_heat = std::numeric_limits<double>::infinity();
    for (const Vector& f : f_probes) {
      const double num = dot(f, op.K * f) + dot(f, op.M * f);
      const double den = dot(f, M1 * f) + dot(f, KA * f) + eps * eps * dot(f, KB * f);
      min_heat = std::min(min_heat, num / den);
    }
    rep.add("heat_coercivity" + at, min_heat, 0.0, min_heat > 0.0, "(<K f,f> + <M f,f>) / weighted H1 norm");

    // B2 f = G_gamma^T E^{-1} G_alpha f, E^{-1} by CG.
    const bool zero_gamma = op.Ggamma.max_abs() == 0.0;
    std::vector<Vector> z(opt.probes), gg(opt.probes);
    parallel_for(opt.probes, [&](std::size_t p) {
      const Vector ga = restrict(op.G * f_probes[p]);
      gg[p] = restrict(op.Ggamma * f_probes[p]);
      z[p] = ga.norm() == 0.0 ? Vector::Zero(nr) : solve_spd(Er, ga, sopt);
    });
    double min_mono = std::numeric_limits<double>::infinity();
    double max_abs = 0.0;
    for (int p = 0; p < opt.probes; ++p) {
      const double b = dot(gg[p], z[p]);
      const double scale = gg[p].norm() * std::sqrt(std::max(0.0, dot(z[p], Er * z[p]))) + 1e-300;
      min_mono = std::min(min_mono, b / scale);
      max_abs = std::max(max_abs, std::abs(b));
    }
    if (zero_gamma) {
      rep.add("B2_zero" + at, max_abs, 0.0, max_abs == 0.0, "gamma = 0");
    } else {
      rep.add("B2_monotone" + at, min_mono, -1e-10, min_mono >= -1e-10,
              "min <B2 f,f> / (|G_gamma f| |f|_E) over " + std::to_string(opt.probes) + " vectors");
    }
    double max_asym = 0.0;
    std::vector<double> values;
    for (int p = 0; p + 1 < 2 * opt.symmetry_pairs && p + 1 < opt.probes; p += 2) {
      const double a = dot(gg[p + 1], z[p]);
      const double b = dot(gg[p], z[p + 1]);
      const double s = std::max(std::abs(a), std::abs(b));
      max_asym = std::max(max_asym, s == 0.0 ? 0.0 : std::abs(a - b) / s);
      values.push_back(a);
    }
    rep.add("B2_symmetric" + at, max_asym, opt.symmetry_tol, max_asym < opt.symmetry_tol);
    if (ti > 0) {
      const double dt = t - t_samples[ti - 1];
      for (std::size_t i = 0; i < values.size() && i < pair_values.size(); ++i)
        if (dt > 0.0) max_quotient = std::max(max_quotient, std::abs(values[i] - pair_values[i]) / dt);
    }
    pair_values = values;
  }
  if (t_samples.size() > 1)
    rep.add("B2_time_quotient" + tag, max_quotient, std::numeric_limits<double>::max(), std::isfinite(max_quotient),
            "max |<B2(t2) f,g> - <B2(t1) f,g>| / (t2 - t1)");
  return rep;
}

// ---------------------------------------------------------------- compare

CompareTable two_scale_compare(const std::vector<double>& eps_list, const ModelSetup& setup) {
  if (eps_list.empty()) throw Error("compare: empty eps list");
  auto cell = std::make_shared<CellContext>(build_cell_mesh(setup.radius, setup.cell_n, setup.dim));
  TwoScaleSolver hom(setup, cell);
  const Mesh& macro = hom.macro_mesh();
  const PointLocator locator(macro, setup.macro_n);
  const P1Space macro_space(macro);
  const auto& points = hom.micro_points();
  const int d = setup.dim;

  std::vector<std::unique_ptr<EpsilonProblem>> problems;
  for (double eps : eps_list) problems.push_back(std::make_unique<EpsilonProblem>(setup, eps, cell));

  // Micro point hosting each tile: the one nearest to the tile centre.
  std::vector<std::vector<int>> tile_mp(eps_list.size());
  std::map<int, std::size_t> needed;
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const EpsilonMesh& m = problems[e]->mesh();
    const int tiles = static_cast<int>(std::llround(std::pow(m.tiles, d)));
    tile_mp[e].resize(tiles);
    for (int k = 0; k < tiles; ++k) {
      const Vec centre = m.tile_origin(k) + Vec::Constant(d, 0.5 * m.eps);
      const int c = locator.locate(centre);
      if (c < 0) throw Error("compare: tile centre outside the macro mesh");
      int best = -1;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < points.size(); ++p) {
        if (points[p].cell != static_cast<std::size_t>(c)) continue;
        const double dist = (points[p].x - centre).norm();
        if (dist < best_dist) {
          best_dist = dist;
          best = static_cast<int>(p);
        }
      }
      tile_mp[e][k] = best;
      needed.emplace(best, needed.size());
    }
  }
  std::vector<std::vector<Vector>> micro_history(needed.size());
  const SimulationResult hres = hom.run([&](const TwoScaleState& s, const StepReport&) {
    for (const auto& [mp, slot] : needed) micro_history[slot].push_back(s.micro[mp].theta);
  });

  CompareTable table;
  table.rows.resize(eps_list.size());
  for (std::size_t e = 0; e < eps_list.size(); ++e) {
    const EpsilonProblem& prob = *problems[e];
    const EpsilonMesh& m = prob.mesh();
    const P1Space& sp = prob.space();
    const std::size_t nv = m.vertices.size();
    // Macro interpolation weights at the eps-mesh vertices.
    std::vector<int> host(nv);
    std::vector<std::array<double, 4>> bary(nv);
    for (std::size_t v = 0; v < nv; ++v) {
      host[v] = locator.locate(m.vertices[v]);
      if (host[v] < 0) throw Error("compare: eps-mesh vertex outside the macro mesh");
      bary[v] = macro_space.barycentric(host[v], m.vertices[v]);
    }
    auto interpolate = [&](const Vector& macro_field) {
      Vector out(nv);
      for (std::size_t v = 0; v < nv; ++v) {
        double s = 0.0;
        for (int a = 0; a <= d; ++a) s += bary[v][a] * macro_field(macro.cells[host[v]][a]);
        out(v) = s;
      }
      return out;
    };
    auto one = [](std::size_t, int, const Vec&) { return 1.0; };
    const CsrMatrix MA = sp.mass(one, phase_mask(m, Phase::A));
    const CsrMatrix MB = sp.mass(one, phase_mask(m, Phase::B));
    const auto inB = m.phase_vertex_mask(Phase::B);

    const EpsilonSolution sol = prob.solve();
    if (sol.times.size() != hres.theta_history.size()) throw Error("compare: time grids differ");
    CompareRow row;
    row.eps = m.eps;
    row.steps = static_cast<int>(sol.times.size()) - 1;
    double ea = 0.0, eb = 0.0, ra = 0.0;
    for (std::size_t k = 1; k < sol.times.size(); ++k) {
      const double dt = sol.times[k] - sol.times[k - 1];
      const Vector ih = interpolate(hres.theta_history[k]);
      const Vector err = sol.theta[k] - ih;
      ea += dt * dot(err, MA * err);
      ra += dt * dot(sol.theta[k], MA * sol.theta[k]);
      Vector rec = ih;
      for (std::size_t v = 0; v < nv; ++v) {
        if (!inB[v]) continue;
        const int mp = tile_mp[e][m.vertex_tile[v]];
        rec(v) = micro_history[needed.at(mp)][k](m.vertex_cell_vertex[v]);
      }
      const Vector errB = sol.theta[k] - rec;
      eb += dt * dot(errB, MB * errB);
    }
    Vector th0_macro(macro.vertices.size());
    for (std::size_t v = 0; v < macro.vertices.size(); ++v) th0_macro(v) = setup.theta0(macro.vertices[v]);
    const Vector ierr = prob.initial_temperature() - interpolate(th0_macro);
    row.error_A = std::sqrt(std::max(0.0, ea));
    row.error_B = std::sqrt(std::max(0.0, eb));
    row.reference_A = std::sqrt(std::max(0.0, ra));
    row.interpolation_A = std::sqrt(std::max(0.0, dot(ierr, MA * ierr)));
    table.rows[e] = row;
  }
  return table;
}

std::vector<std::string> compare_csv_header() {
  return {"eps", "error_A", "error_B", "interpolation_A", "reference_A", "relative_error_A", "steps"};
}

void write_compare_csv(std::ostream& out, const CompareTable& table) {
  CsvWriter w(out, compare_csv_header());
  for (const auto& r : table.rows)
    w.row({r.eps, r.error_A, r.error_B, r.interpolation_A, r.reference_A,
           r.reference_A > 0.0 ? r.error_A / r.reference_A : 0.0, static_cast<double>(r.steps)});
}

std::vector<std::string> norm_bundle_csv_header() {
  std::vector<std::string> h{"eps"};
  for (const char* n : NormBundle::names()) h.emplace_back(n);
  return h;
}

void write_norm_bundle_csv(std::ostream& out, const std::vector<std::pair<double, NormBundle>>& rows) {
  CsvWriter w(out, norm_bundle_csv_header());
  for (const auto& [eps, nb] : rows) {
    std::vector<double> r{eps};
    for (double v : nb.values()) r.push_back(v);
    w.row(r);
  }
}

}  // namespace thermohom
