#include "thermohom/twoscale.hpp"

#include "thermohom/output.hpp"
#include "thermohom/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace thermohom {

namespace {

Eigen::MatrixXd dense_block(const CsrMatrix& A, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> col_pos(A.cols, -1);
  for (std::size_t j = 0; j < cols.size(); ++j) col_pos[cols[j]] = static_cast<int>(j);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
      const int j = col_pos[A.col_idx[k]];
      if (j >= 0) D(i, j) = A.values[k];
    }
  }
  return D;
}

Vector gather(const Vector& v, const std::vector<int>& idx) {
  Vector out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
  return out;
}

void scatter_add(Vector& v, const std::vector<int>& idx, const Vector& part) {
  for (std::size_t i = 0; i < idx.size(); ++i) v(idx[i]) += part(i);
}

double sum(const Vector& v) { return deterministic_sum(std::span<const double>(v.data(), v.size())); }

double dot(const Vector& a, const Vector& b) {
  return deterministic_dot(std::span<const double>(a.data(), a.size()), std::span<const double>(b.data(), b.size()));
}

}  // namespace

TwoScaleSolver::TwoScaleSolver(ModelSetup setup, std::shared_ptr<const CellContext> cell) : setup_(std::move(setup)) {
  setup_.validate();
  const int d = setup_.dim;
  mesh_ = build_box_mesh(setup_.macro_n, d);
  space_ = std::make_unique<P1Space>(mesh_);
  if (!cell) cell = std::make_shared<CellContext>(build_cell_mesh(setup_.radius, setup_.cell_n, d));
  if (cell->dim() != d) throw Error("cell mesh dimension does not match the model");
  cache_ = std::make_unique<CellCache>(cell, setup_.transformation, setup_.material, setup_.sources,
                                       setup_.t_quantum(), setup_.x_quantum());

  const int nq = space_->nq();
  for (std::size_t c = 0; c < mesh_.cells.size(); ++c) {
    if (setup_.micro_per_element) {
      MicroPoint p;
      p.cell = c;
      p.x = mesh_.cell_centroid(c);
      p.weight = space_->volume(c);
      for (int a = 0; a <= d; ++a) p.beta[a] = 1.0 / (d + 1);
      points_.push_back(p);
    } else {
      for (int q = 0; q < nq; ++q) {
        MicroPoint p;
        p.cell = c;
        p.q = q;
        p.x = space_->qp_position(c, q);
        p.weight = space_->qp_weight(c);
        p.beta = quadrature_bary(d, q);
        points_.push_back(p);
      }
    }
  }
  boundary_ = boundary_vertices(mesh_);
  mass1_ = space_->mass([](std::size_t, int, const Vec&) { return 1.0; });

  const auto& inB = cell->vertex_mask(Phase::B);
  const auto& iface = cell->interface_vertices();
  for (std::size_t v = 0; v < inB.size(); ++v) {
    if (!inB[v]) continue;
    if (iface[v]) {
      gamma_.push_back(static_cast<int>(v));
    } else {
      interior_.push_back(static_cast<int>(v));
      for (int i = 0; i < d; ++i) interior_vec_.push_back(static_cast<int>(v) * d + i);
    }
  }
}

std::shared_ptr<const MicroOperators> TwoScaleSolver::micro_operators(double t, const Vec& x) {
  auto sol = cache_->get(t, x);
  {
    std::lock_guard lock(ops_mutex_);
    auto it = ops_.find(sol.get());
    if (it != ops_.end()) return it->second;
  }
  const CellContext& ctx = cache_->context();
  const P1Space& sp = ctx.space();
  const CellField& f = sol->field;
  const auto& mask = ctx.cell_mask(Phase::B);
  auto ops = std::make_shared<MicroOperators>();
  ops->cell = sol;
  ops->M = sp.mass([&](std::size_t c, int q, const Vec&) { return f.at(c, q).c; }, mask);
  ops->K = sp.diffusion([&](std::size_t c, int q, const Vec&) { return f.at(c, q).K; }, mask);
  ops->Adv = sp.advection([&](std::size_t c, int q, const Vec&) { return f.at(c, q).c; },
                          [&](std::size_t c, int q, const Vec&) { return f.at(c, q).v; }, mask);
  ops->Dg = sp.coupling([&](std::size_t c, int q, const Vec&) { return f.at(c, q).gamma; }, mask).transpose();
  ops->DgAdv = sp.coupling_advection([&](std::size_t c, int q, const Vec&) { return f.at(c, q).gamma; },
                                     [&](std::size_t c, int q, const Vec&) { return f.at(c, q).v; }, mask);
  ops->E = sp.elasticity([&](std::size_t c, int q, const Vec&) { return f.at(c, q).C; }, mask);
  ops->G = sp.coupling([&](std::size_t c, int q, const Vec&) { return f.at(c, q).alpha; }, mask);
  ops->F_theta = sp.load_scalar([&](std::size_t c, int q, const Vec&) { return f.at(c, q).f_theta; }, mask);
  ops->F_u = sp.load_vector([&](std::size_t c, int q, const Vec&) { return f.at(c, q).f_u; }, mask);
  ops->mass_weights = ops->M.transpose() * Vector::Ones(ops->M.rows);
  ops->dissipation_weights = ops->Dg.transpose() * Vector::Ones(ops->Dg.rows);
  if (!interior_vec_.empty()) {
    ops->elastic.compute(dense_block(ops->E, interior_vec_, interior_vec_));
    if (ops->elastic.info() != Eigen::Success)
      throw SolverError("inclusion elasticity operator is not positive definite at t = " + format_double(t));
  }
  std::lock_guard lock(ops_mutex_);
  auto [it, inserted] = ops_.emplace(sol.get(), ops);
  return it->second;
}

std::shared_ptr<const MicroHeatFactor> TwoScaleSolver::heat_factor(const std::shared_ptr<const MicroOperators>& ops,
                                                                   double dt) {
  const auto key = std::make_pair(ops.get(), std::llround(dt * 1e12));
  {
    std::lock_guard lock(ops_mutex_);
    auto it = factors_.find(key);
    if (it != factors_.end()) return it->second;
  }
  auto fac = std::make_shared<MicroHeatFactor>();
  const CsrMatrix S = add(1.0 / dt, ops->M, 1.0, add(1.0, ops->Adv, 1.0, ops->K));
  fac->theta1 = Vector::Zero(S.rows);
  for (int v : gamma_) fac->theta1(v) = 1.0;
  if (!interior_.empty()) {
    fac->lu.compute(dense_block(S, interior_, interior_));
    const Vector lift = S * fac->theta1;
    const Vector x = fac->lu.solve(-gather(lift, interior_));
    if (!x.allFinite()) throw SolverError("inclusion heat operator is singular");
    scatter_add(fac->theta1, interior_, x);
  }
  fac->q1 = dot(ops->mass_weights, fac->theta1);
  std::lock_guard lock(ops_mutex_);
  auto [it, inserted] = factors_.emplace(key, fac);
  return it->second;
}

TwoScaleSolver::MicroSplit TwoScaleSolver::micro_heat(std::size_t mp, double t_new, double dt,
                                                      const MicroState& previous, const Vector& u_lag) {
  MicroSplit s;
  s.ops = micro_operators(t_new, points_[mp].x);
  s.factor = heat_factor(s.ops, dt);
  const MicroOperators& o = *s.ops;
  const Vector r = previous.mass_theta / dt + (previous.dissipation - o.Dg * u_lag) / dt - o.DgAdv * u_lag + o.F_theta;
  s.theta0 = Vector::Zero(o.M.rows);
  if (!interior_.empty()) scatter_add(s.theta0, interior_, s.factor->lu.solve(gather(r, interior_)));
  s.q_hom = dot(o.mass_weights, s.theta0);
  return s;
}

MicroState TwoScaleSolver::complete_micro(const MicroOperators& o, Vector theta, const Vec& u_A) const {
  const int d = setup_.dim;
  MicroState m;
  m.theta = std::move(theta);
  m.u = Vector::Zero(o.E.rows);
  const auto& inB = cache_->context().vertex_mask(Phase::B);
  for (std::size_t v = 0; v < inB.size(); ++v)
    if (inB[v])
      for (int i = 0; i < d; ++i) m.u(v * d + i) = u_A(i);
  if (!interior_vec_.empty()) {
    const Vector rhs = o.G * m.theta + o.F_u;
    scatter_add(m.u, interior_vec_, o.elastic.solve(gather(rhs, interior_vec_)));
  }
  m.mass_theta = o.M * m.theta;
  m.dissipation = o.Dg * m.u;
  m.heat_content = sum(m.mass_theta);
  m.dissipation_average = sum(m.dissipation);
  return m;
}

MicroState TwoScaleSolver::micro_finish(const MicroSplit& s, double theta_A, const Vec& u_A) {
  return complete_micro(*s.ops, s.theta0 + theta_A * s.factor->theta1, u_A);
}

MicroResult TwoScaleSolver::micro_solve(std::size_t mp, double t_old, double t_new, double theta_A, const Vec& u_A,
                                        const MicroState& previous) {
  if (mp >= points_.size()) throw Error("micro point index out of range");
  const double dt = t_new - t_old;
  if (!(dt > 0.0)) throw Error("micro_solve needs t_new > t_old");
  MicroResult r;
  Vector u_lag = previous.u;
  try {
    for (int it = 0; it < setup_.fixed_point_max_iter; ++it) {
      const MicroSplit s = micro_heat(mp, t_new, dt, previous, u_lag);
      r.state = micro_finish(s, theta_A, u_A);
      r.homogeneous_content = s.q_hom;
      r.unit_content = s.factor->q1;
      const double change = (r.state.u - u_lag).lpNorm<Eigen::Infinity>();
      u_lag = r.state.u;
      if (change < setup_.fixed_point_tol) return r;
    }
  } catch (const Error& e) {
    throw SolverError("micro point " + std::to_string(mp) + ": " + e.what());
  }
  throw SolverError("micro point " + std::to_string(mp) + ": heat/elasticity iteration did not converge");
}

std::vector<EffectiveCoefficients> TwoScaleSolver::effective_at(double t) {
  const std::size_t n = points_.size();
  std::vector<std::shared_ptr<const CellSolution>> sols(n);
  if (n == 0) return {};
  sols[0] = cache_->get(t, points_[0].x);
  parallel_for(n - 1, [&](std::size_t i) { sols[i + 1] = cache_->get(t, points_[i + 1].x); });
  std::vector<const CellSolution*> unique;
  std::map<const CellSolution*, std::size_t> slot;
  for (const auto& s : sols)
    if (slot.emplace(s.get(), unique.size()).second) unique.push_back(s.get());
  std::vector<EffectiveCoefficients> values(unique.size());
  parallel_for(unique.size(), [&](std::size_t i) {
    values[i] = compute_effective(cache_->context(), *unique[i], setup_.material, setup_.effective);
  });
  std::vector<EffectiveCoefficients> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = values[slot[sols[i].get()]];
  return out;
}

const EffectiveCoefficients& TwoScaleSolver::eff_at(const std::vector<EffectiveCoefficients>& eff, std::size_t c,
                                                    int q) const {
  return setup_.micro_per_element ? eff[c] : eff[c * space_->nq() + q];
}

double TwoScaleSolver::theta_at(const TwoScaleState& s, std::size_t mp) const {
  const MicroPoint& p = points_[mp];
  double v = 0.0;
  for (int a = 0; a <= setup_.dim; ++a) v += p.beta[a] * s.theta_A(mesh_.cells[p.cell][a]);
  return v;
}

Vec TwoScaleSolver::u_at(const TwoScaleState& s, std::size_t mp) const {
  const int d = setup_.dim;
  const MicroPoint& p = points_[mp];
  Vec u = zero_vec(d);
  for (int a = 0; a <= d; ++a)
    for (int i = 0; i < d; ++i) u(i) += p.beta[a] * s.u_A(mesh_.cells[p.cell][a] * d + i);
  return u;
}

Vector TwoScaleSolver::solve_mechanics(const std::vector<EffectiveCoefficients>& eff, const Vector& theta,
                                       double* residual) {
  const int d = setup_.dim;
  const P1Space& sp = *space_;
  const CsrMatrix A = sp.elasticity([&](std::size_t c, int q, const Vec&) { return eff_at(eff, c, q).C_eff; });
  const CsrMatrix G = sp.coupling([&](std::size_t c, int q, const Vec&) { return eff_at(eff, c, q).alpha_eff; });
  const Vector b = G * theta + sp.load_vector([&](std::size_t c, int q, const Vec&) -> Vec {
                     const auto& e = eff_at(eff, c, q);
                     return e.f_u_eff + e.H_eff;
                   });
  ConstraintSet cs(A.rows);
  for (std::size_t v = 0; v < boundary_.size(); ++v)
    if (boundary_[v])
      for (int i = 0; i < d; ++i) cs.pin(static_cast<int>(v) * d + i, 0.0);
  const ReducedSystem sys = apply_constraints(A, b, cs);
  SolverOptions opt = setup_.solver();
  opt.tol = std::min(opt.tol, 1e-12);
  const Vector u = solve_reduced(sys, opt);
  if (residual) {
    Vector r = A * u - b;
    double bn = 0.0;
    for (int k = 0; k < r.size(); ++k) {
      if (boundary_[k / d]) {
        r(k) = 0.0;
      } else {
        bn += b(k) * b(k);
      }
    }
    const double rn = r.norm();
    *residual = rn == 0.0 ? 0.0 : rn / std::max(std::sqrt(bn), 1e-300);
  }
  return u;
}

double TwoScaleSolver::dissipation_at(const TwoScaleState& s, std::size_t mp) const {
  const MicroPoint& p = points_[mp];
  const Mat grad_u = space_->grad_vector(p.cell, s.u_A);
  double g = double_dot(s.eff[mp].gamma_eff, grad_u);
  if (setup_.effective.interpretation == Interpretation::Derived) g += s.micro[mp].dissipation_average;
  return g;
}

Vector TwoScaleSolver::assemble_content(const TwoScaleState& s) const {
  const CsrMatrix Mc = space_->mass([&](std::size_t c, int q, const Vec&) { return eff_at(s.eff, c, q).c_eff; });
  Vector content = Mc * s.theta_A;
  for (std::size_t mp = 0; mp < points_.size(); ++mp) {
    const MicroPoint& p = points_[mp];
    const double m = p.weight * (s.micro[mp].heat_content + dissipation_at(s, mp));
    for (int a = 0; a <= setup_.dim; ++a) content(mesh_.cells[p.cell][a]) += p.beta[a] * m;
  }
  return content;
}

double TwoScaleSolver::l2(const Vector& v) const { return std::sqrt(std::max(0.0, dot(v, mass1_ * v))); }

double TwoScaleSolver::l2_vector(const Vector& u) const {
  const int d = setup_.dim;
  const std::size_t nv = mesh_.vertices.size();
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    Vector c(nv);
    for (std::size_t v = 0; v < nv; ++v) c(v) = u(v * d + i);
    s += dot(c, mass1_ * c);
  }
  return std::sqrt(std::max(0.0, s));
}

TwoScaleState TwoScaleSolver::init_state(const Vector& theta_A0, const std::vector<Vector>& theta_B0) {
  const std::size_t nv = mesh_.vertices.size();
  const std::size_t nc = cache_->context().mesh().vertices.size();
  if (static_cast<std::size_t>(theta_A0.size()) != nv)
    throw Error("mesh/config mismatch: theta_A0 has " + std::to_string(theta_A0.size()) + " entries, macro mesh has " +
                std::to_string(nv) + " vertices");
  if (!theta_B0.empty() && theta_B0.size() != points_.size())
    throw Error("mesh/config mismatch: " + std::to_string(theta_B0.size()) + " micro fields for " +
                std::to_string(points_.size()) + " micro points");
  TwoScaleState s;
  s.t = 0.0;
  s.step = 0;
  s.theta_A = theta_A0;
  s.eff = effective_at(0.0);
  s.u_A = solve_mechanics(s.eff, s.theta_A, &s.mechanics_residual);
  s.micro.resize(points_.size());
  const auto& inB = cache_->context().vertex_mask(Phase::B);
  parallel_for(points_.size(), [&](std::size_t mp) {
    const double a = theta_at(s, mp);
    Vector th = Vector::Zero(nc);
    if (!theta_B0.empty()) {
      if (static_cast<std::size_t>(theta_B0[mp].size()) != nc)
        throw Error("mesh/config mismatch: micro field " + std::to_string(mp) + " has wrong size");
      for (std::size_t v = 0; v < nc; ++v)
        if (inB[v]) th(v) = theta_B0[mp](v);
    } else {
      for (std::size_t v = 0; v < nc; ++v)
        if (inB[v]) th(v) = a;
    }
    for (int v : gamma_) th(v) = a;
    const auto ops = micro_operators(0.0, points_[mp].x);
    s.micro[mp] = complete_micro(*ops, std::move(th), u_at(s, mp));
  });
  s.content = assemble_content(s);
  return s;
}

TwoScaleState TwoScaleSolver::initial_state() {
  Vector th(mesh_.vertices.size());
  for (std::size_t v = 0; v < mesh_.vertices.size(); ++v) th(v) = setup_.theta0(mesh_.vertices[v]);
  return init_state(th);
}

StepReport TwoScaleSolver::macro_step(TwoScaleState& state) {
  const int d = setup_.dim;
  const int k = state.step + 1;
  const double t_old = state.t;
  const double t_new = setup_.time(k);
  const double dt = t_new - t_old;
  if (!(dt > 0.0)) throw Error("no time step left after t = " + format_double(t_old));
  const std::size_t nmp = points_.size();
  const P1Space& sp = *space_;

  TwoScaleState next;
  next.t = t_new;
  next.step = k;
  next.eff = effective_at(t_new);
  const auto& eff = next.eff;

  const CsrMatrix Mc = sp.mass([&](std::size_t c, int q, const Vec&) { return eff_at(eff, c, q).c_eff; });
  const CsrMatrix Kc = sp.diffusion([&](std::size_t c, int q, const Vec&) { return eff_at(eff, c, q).K_eff; });
  const double s_lat = setup_.latent_sign;
  const Vector F = sp.load_scalar([&](std::size_t c, int q, const Vec&) {
    const auto& e = eff_at(eff, c, q);
    return e.f_theta_eff - s_lat * e.W_eff;
  });

  next.theta_A = state.theta_A;
  next.u_A = state.u_A;
  next.micro = state.micro;
  std::vector<MicroSplit> splits(nmp);
  CsrMatrix H;
  bool converged = false;
  for (int it = 1; it <= setup_.fixed_point_max_iter; ++it) {
    parallel_for(nmp, [&](std::size_t mp) {
      splits[mp] = micro_heat(mp, t_new, dt, state.micro[mp], next.micro[mp].u);
    });
    if (it == 1) {
      const CsrMatrix base = add(1.0 / dt, Mc, 1.0, Kc);
      std::vector<Triplet> tr;
      tr.reserve(base.nnz() + nmp * (d + 1) * (d + 1));
      for (int r = 0; r < base.rows; ++r)
        for (int j = base.row_ptr[r]; j < base.row_ptr[r + 1]; ++j) tr.push_back({r, base.col_idx[j], base.values[j]});
      for (std::size_t mp = 0; mp < nmp; ++mp) {
        const MicroPoint& p = points_[mp];
        const double w = p.weight * splits[mp].factor->q1 / dt;
        for (int a = 0; a <= d; ++a)
          for (int b = 0; b <= d; ++b)
            tr.push_back({mesh_.cells[p.cell][a], mesh_.cells[p.cell][b], w * p.beta[a] * p.beta[b]});
      }
      H = CsrMatrix::from_triplets(base.rows, base.cols, std::move(tr));
    }
    Vector rhs = state.content / dt + F;
    for (std::size_t mp = 0; mp < nmp; ++mp) {
      const MicroPoint& p = points_[mp];
      const double m = p.weight * (splits[mp].q_hom + dissipation_at(next, mp)) / dt;
      for (int a = 0; a <= d; ++a) rhs(mesh_.cells[p.cell][a]) -= p.beta[a] * m;
    }
    Vector theta;
    Vector u;
    try {
      theta = solve_spd(H, rhs, setup_.solver());
      u = solve_mechanics(eff, theta, &next.mechanics_residual);
    } catch (const Error& e) {
      throw SolverError("step " + std::to_string(k) + ", iteration " + std::to_string(it) + ": " + e.what());
    }
    const double change = l2(theta - next.theta_A) + l2_vector(u - next.u_A);
    next.theta_A = std::move(theta);
    next.u_A = std::move(u);
    parallel_for(nmp, [&](std::size_t mp) {
      next.micro[mp] = micro_finish(splits[mp], theta_at(next, mp), u_at(next, mp));
    });
    next.iterations = it;
    next.change = change;
    if (change < setup_.fixed_point_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw SolverError("step " + std::to_string(k) + ": fixed-point iteration did not converge in " +
                      std::to_string(setup_.fixed_point_max_iter) + " iterations (last change " +
                      format_double(next.change) + ")");
  next.content = assemble_content(next);
  state = std::move(next);
  return report(state);
}

double TwoScaleSolver::trace_defect(const TwoScaleState& s) const {
  const int d = setup_.dim;
  double defect = 0.0;
  for (std::size_t mp = 0; mp < points_.size(); ++mp) {
    const double a = theta_at(s, mp);
    const Vec u = u_at(s, mp);
    for (int v : gamma_) {
      defect = std::max(defect, std::abs(s.micro[mp].theta(v) - a));
      for (int i = 0; i < d; ++i) defect = std::max(defect, std::abs(s.micro[mp].u(v * d + i) - u(i)));
    }
  }
  return defect;
}

StepReport TwoScaleSolver::report(const TwoScaleState& s) const {
  StepReport r;
  r.step = s.step;
  r.t = s.t;
  r.iterations = s.iterations;
  r.change = s.change;
  const CsrMatrix Mc = space_->mass([&](std::size_t c, int q, const Vec&) { return eff_at(s.eff, c, q).c_eff; });
  const Vector Mt = Mc * s.theta_A;
  double micro_heat = 0.0;
  double weight = 0.0;
  double mean = 0.0;
  for (std::size_t mp = 0; mp < points_.size(); ++mp) {
    const double w = points_[mp].weight;
    micro_heat += w * s.micro[mp].heat_content;
    double m = 0.0;
    for (int v : interior_) m += s.micro[mp].theta(v);
    for (int v : gamma_) m += s.micro[mp].theta(v);
    const std::size_t nb = interior_.size() + gamma_.size();
    mean += w * (nb ? m / nb : 0.0);
    weight += w;
  }
  r.heat_content = sum(Mt) + micro_heat;
  r.total_content = sum(s.content);
  r.heat_energy = dot(s.theta_A, Mt);
  r.theta_A_L2 = l2(s.theta_A);
  r.u_A_L2 = l2_vector(s.u_A);
  r.theta_B_mean = weight > 0.0 ? mean / weight : 0.0;
  r.trace_defect = trace_defect(s);
  r.mechanics_residual = s.mechanics_residual;
  return r;
}

SimulationResult TwoScaleSolver::run(const std::function<void(const TwoScaleState&, const StepReport&)>& observer) {
  SimulationResult out;
  TwoScaleState state = initial_state();
  auto record = [&](const StepReport& r) {
    out.reports.push_back(r);
    out.theta_history.push_back(state.theta_A);
    out.u_history.push_back(state.u_A);
    if (observer) observer(state, r);
  };
  record(report(state));
  const int steps = setup_.steps();
  for (int k = 1; k <= steps; ++k) {
    StepReport r;
    try {
      r = macro_step(state);
    } catch (const SolverError&) {
      throw;
    } catch (const Error& e) {
      throw Error("step " + std::to_string(k) + ": " + e.what());
    }
    record(r);
  }
  out.final_state = std::move(state);
  return out;
}

std::vector<std::string> diagnostics_csv_header() {
  return {"step",          "t",           "iterations", "change",       "heat_content",      "total_content",
          "heat_energy",   "theta_A_L2",  "u_A_L2",     "theta_B_mean", "trace_defect",      "mechanics_residual"};
}

void write_diagnostics_csv(std::ostream& out, const std::vector<StepReport>& reports) {
  CsvWriter w(out, diagnostics_csv_header());
  for (const auto& r : reports)
    w.row({static_cast<double>(r.step), r.t, static_cast<double>(r.iterations), r.change, r.heat_content,
           r.total_content, r.heat_energy, r.theta_A_L2, r.u_A_L2, r.theta_B_mean, r.trace_defect,
           r.mechanics_residual});
}

void write_macro_vtk(const std::string& path, const TwoScaleSolver& solver, const TwoScaleState& state) {
  const int d = solver.setup().dim;
  VtkField th{"theta_A", 1, std::vector<double>(state.theta_A.data(), state.theta_A.data() + state.theta_A.size())};
  VtkField u{"u_A", d, std::vector<double>(state.u_A.data(), state.u_A.data() + state.u_A.size())};
  write_vtk_file(path, solver.macro_mesh(), {th, u});
}

}  // namespace thermohom
