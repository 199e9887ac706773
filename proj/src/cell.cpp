#include "thermohom/cell.hpp"
#include "thermohom/parallel.hpp"

#include <cmath>

namespace thermohom {

namespace {

std::array<std::vector<char>, 2> vertex_masks(const Mesh& m) {
  return {m.phase_vertex_mask(Phase::A), m.phase_vertex_mask(Phase::B)};
}

std::array<P1Space::Mask, 2> cell_masks(const Mesh& m) {
  std::array<P1Space::Mask, 2> out{P1Space::Mask(m.cells.size(), 0), P1Space::Mask(m.cells.size(), 0)};
  for (std::size_t c = 0; c < m.cells.size(); ++c) out[phase_index(m.phase[c])][c] = 1;
  return out;
}

QpCoefficients compact(const TransformedCoefficients& tc) {
  QpCoefficients q;
  q.C = tc.C_ref;
  q.alpha = tc.alpha_ref;
  q.gamma = tc.gamma_ref;
  q.K = tc.K_ref;
  q.c = tc.c_ref;
  q.J = tc.J;
  q.v = tc.v_ref;
  q.f_u = tc.f_u_ref;
  q.f_theta = tc.f_theta_ref;
  return q;
}

}  // namespace

CellContext::CellContext(CellMesh mesh)
    : mesh_(std::move(mesh)), space_(mesh_), cell_mask_(cell_masks(mesh_)), vertex_mask_(vertex_masks(mesh_)) {
  interface_vertices_.assign(mesh_.vertices.size(), 0);
  for (const auto& f : mesh_.interface)
    for (int i = 0; i < mesh_.dim; ++i) interface_vertices_[f.v[i]] = 1;
  basis_A_ = space_.basis_integrals(cell_mask_[0]);
}

ConstraintSet CellContext::periodic_constraints(int k) const {
  const std::size_t nv = mesh_.vertices.size();
  ConstraintSet cs(static_cast<int>(nv) * k);
  const auto& active = vertex_mask_[0];
  for (std::size_t v = 0; v < nv; ++v) {
    for (int i = 0; i < k; ++i) {
      const int dof = static_cast<int>(v) * k + i;
      if (!active[v]) {
        cs.inactive[dof] = 1;
        continue;
      }
      const int lead = mesh_.periodic_leader.empty() ? static_cast<int>(v) : mesh_.periodic_leader[v];
      if (lead != static_cast<int>(v)) cs.identify(dof, lead * k + i);
    }
  }
  for (int i = 0; i < k; ++i) {
    Vector w = Vector::Zero(cs.n);
    for (std::size_t v = 0; v < nv; ++v) w(v * k + i) = basis_A_(v);
    cs.zero_mean_weights.push_back(std::move(w));
  }
  return cs;
}

CellField CellContext::sample(const Transformation& tr, const MaterialParams& mat, const Sources& src, double t,
                              const Vec& x) const {
  CellField f;
  f.t = t;
  f.x = x;
  f.nq = space_.nq();
  const std::size_t nc = mesh_.cells.size();
  f.qp.resize(nc * f.nq);
  parallel_for(nc, [&](std::size_t c) {
    for (int q = 0; q < f.nq; ++q)
      f.qp[c * f.nq + q] =
          compact(transformed_coefficients(tr, mat, mesh_.phase[c], t, x, space_.qp_position(c, q), &src));
  });
  f.facet.resize(mesh_.interface.size());
  parallel_for(mesh_.interface.size(), [&](std::size_t i) {
    const auto& fac = mesh_.interface[i];
    Vec y = zero_vec(mesh_.dim);
    for (int k = 0; k < mesh_.dim; ++k) y += mesh_.vertices[fac.v[k]];
    y /= mesh_.dim;
    const auto tc = transformed_coefficients(tr, mat, Phase::B, t, x, y, &src, &fac.normal);
    f.facet[i].W = tc.W_ref;
    f.facet[i].Hn = tc.H_ref * fac.normal;
  });
  for (std::size_t c = 0; c < nc; ++c) {
    double s = 0.0;
    for (int q = 0; q < f.nq; ++q) s += f.qp[c * f.nq + q].J;
    (mesh_.phase[c] == Phase::A ? f.measure_A : f.measure_B) += s * space_.qp_weight(c);
  }
  return f;
}

SolverOptions default_cell_solver() {
  SolverOptions o;
  o.tol = 1e-12;
  return o;
}

namespace {

CsrMatrix elastic_operator(const CellContext& ctx, const CellField& f) {
  return ctx.space().elasticity([&](std::size_t c, int q, const Vec&) { return f.at(c, q).C; },
                                ctx.cell_mask(Phase::A));
}

CsrMatrix thermal_operator(const CellContext& ctx, const CellField& f) {
  return ctx.space().diffusion([&](std::size_t c, int q, const Vec&) { return f.at(c, q).K; },
                               ctx.cell_mask(Phase::A));
}

Vector elastic_load(const CellContext& ctx, const CellField& f, int pair) {
  const int d = ctx.dim();
  if (pair < 0)
    return ctx.space().load_divergence([&](std::size_t c, int q, const Vec&) { return f.at(c, q).alpha; },
                                       ctx.cell_mask(Phase::A));
  const Mat E = unit_strain(d, pair);
  return ctx.space().load_divergence([&](std::size_t c, int q, const Vec&) -> Mat { return -contract(f.at(c, q).C, E); },
                                     ctx.cell_mask(Phase::A));
}

Vector thermal_load(const CellContext& ctx, const CsrMatrix& A, int j) {
  const auto& verts = ctx.mesh().vertices;
  Vector y(verts.size());
  for (std::size_t v = 0; v < verts.size(); ++v) y(v) = verts[v](j);
  return -(A * y);
}

Vector solve_cell(const CsrMatrix& A, const Vector& b, const ConstraintSet& cs, const SolverOptions& opt,
                  Correctors& out) {
  const ReducedSystem sys = apply_constraints(A, b, cs);
  SolverStats st;
  Vector x = solve_reduced(sys, opt, &st);
  out.max_relative_residual = std::max(out.max_relative_residual, st.relative_residual);
  out.iterations += st.iterations;
  return x;
}

double relative_residual(const CsrMatrix& A, const Vector& b, const Vector& tau, const Vector& test) {
  const double num = std::abs(test.dot(b - A * tau));
  const double den = b.norm() * test.norm();
  return den > 0.0 ? num / den : num;
}

}  // namespace

void solve_elastic_correctors(const CellContext& ctx, const CellField& field, Correctors& out,
                              const SolverOptions& opt) {
  const int d = ctx.dim();
  const CsrMatrix A = elastic_operator(ctx, field);
  const ConstraintSet cs = ctx.periodic_constraints(d);
  out.t = field.t;
  out.x = field.x;
  out.tau_u.clear();
  for (int p = 0; p < sym_pair_count(d); ++p) out.tau_u.push_back(solve_cell(A, elastic_load(ctx, field, p), cs, opt, out));
  out.tau_u_theta = solve_cell(A, elastic_load(ctx, field, -1), cs, opt, out);
}

void solve_thermal_correctors(const CellContext& ctx, const CellField& field, Correctors& out,
                              const SolverOptions& opt) {
  const CsrMatrix A = thermal_operator(ctx, field);
  const ConstraintSet cs = ctx.periodic_constraints(1);
  out.t = field.t;
  out.x = field.x;
  out.tau_theta.clear();
  for (int j = 0; j < ctx.dim(); ++j) out.tau_theta.push_back(solve_cell(A, thermal_load(ctx, A, j), cs, opt, out));
}

Correctors solve_correctors(const CellContext& ctx, const CellField& field, const SolverOptions& opt) {
  Correctors c;
  solve_elastic_correctors(ctx, field, c, opt);
  solve_thermal_correctors(ctx, field, c, opt);
  return c;
}

double elastic_corrector_residual(const CellContext& ctx, const CellField& field, const Vector& tau, int pair,
                                  const Vector& test) {
  return relative_residual(elastic_operator(ctx, field), elastic_load(ctx, field, pair), tau, test);
}

double thermal_corrector_residual(const CellContext& ctx, const CellField& field, const Vector& tau, int j,
                                  const Vector& test) {
  const CsrMatrix A = thermal_operator(ctx, field);
  return relative_residual(A, thermal_load(ctx, A, j), tau, test);
}

void write_correctors_vtk(const std::string& path, const CellContext& ctx, const Correctors& cor) {
  const int d = ctx.dim();
  std::vector<VtkField> fields;
  auto add = [&](const std::string& name, int comps, const Vector& v) {
    VtkField f;
    f.name = name;
    f.components = comps;
    f.values.assign(v.data(), v.data() + v.size());
    fields.push_back(std::move(f));
  };
  for (int p = 0; p < static_cast<int>(cor.tau_u.size()); ++p) {
    const auto [j, k] = sym_pair(d, p);
    add("tau_u_" + std::to_string(j + 1) + std::to_string(k + 1), d, cor.tau_u[p]);
  }
  if (cor.tau_u_theta.size() > 0) add("tau_u_theta", d, cor.tau_u_theta);
  for (int j = 0; j < static_cast<int>(cor.tau_theta.size()); ++j)
    add("tau_theta_" + std::to_string(j + 1), 1, cor.tau_theta[j]);
  write_vtk_file(path, ctx.mesh(), fields);
}

CellCache::CellCache(std::shared_ptr<const CellContext> ctx, Transformation tr, MaterialParams mat, Sources src,
                     double t_quantum, double x_quantum, SolverOptions opt)
    : ctx_(std::move(ctx)),
      tr_(std::move(tr)),
      mat_(std::move(mat)),
      src_(std::move(src)),
      t_quantum_(t_quantum),
      x_quantum_(x_quantum),
      opt_(opt) {
  if (!(t_quantum_ > 0.0) || !(x_quantum_ > 0.0)) throw Error("cell cache quanta must be positive");
}

CellCache::Key CellCache::key(double t, const Vec& x) const {
  Key k{std::llround(t / t_quantum_), 0, 0, 0};
  if (!tr_.x_independent())
    for (int i = 0; i < x.size(); ++i) k[i + 1] = std::llround(x(i) / x_quantum_);
  return k;
}

std::size_t CellCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::shared_ptr<const CellSolution> CellCache::get(double t, const Vec& x) {
  const Key k = key(t, x);
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(k);
    if (it != entries_.end()) return it->second;
  }
  ++misses_;
  const double tr = static_cast<double>(k[0]) * t_quantum_;
  Vec xr = Vec::Constant(ctx_->dim(), 0.5);
  if (!tr_.x_independent())
    for (int i = 0; i < ctx_->dim(); ++i) xr(i) = static_cast<double>(k[i + 1]) * x_quantum_;
  auto sol = std::make_shared<CellSolution>();
  sol->field = ctx_->sample(tr_, mat_, src_, tr, xr);
  sol->correctors = solve_correctors(*ctx_, sol->field, opt_);
  std::lock_guard lock(mutex_);
  return entries_.emplace(k, std::move(sol)).first->second;
}

}  // namespace thermohom
