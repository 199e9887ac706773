#include "support.hpp"

#include <doctest.h>

using namespace thermohom;
using namespace thermohom::testing;

namespace {

const Vec& center() {
  static const Vec c = Vec::Constant(2, 0.5);
  return c;
}

EffectiveCoefficients effective_of(const CellContext& ctx, const Transformation& tr, const MaterialParams& mat,
                                   double t, EffectiveOptions opt = {}) {
  const CellField f = ctx.sample(tr, mat, Sources::zero(2), t, center());
  const CellSolution sol{f, solve_correctors(ctx, f)};
  return compute_effective(ctx, sol, mat, opt);
}

}  // namespace

TEST_SUITE("cell") {

TEST_CASE("homogeneous cell has vanishing correctors") {
  const CellContext ctx(build_cell_mesh(0.0, 8, 2));
  const MaterialParams mat = MaterialParams::defaults(2);
  const CellField f = ctx.sample(Transformation::identity(2), mat, Sources::zero(2), 0.0, center());
  const Correctors c = solve_correctors(ctx, f);
  for (const auto& t : c.tau_u) CHECK(t.norm() < 1e-12);
  for (const auto& t : c.tau_theta) CHECK(t.norm() < 1e-12);
  CHECK(c.tau_u_theta.norm() < 1e-12);
  const CellSolution sol{f, c};
  const auto e = compute_effective(ctx, sol, mat, EffectiveOptions{});
  CHECK((e.C_eff - mat.C[0]).norm() < 1e-12);
  CHECK((e.K_eff - mat.K[0]).norm() < 1e-12);
  CHECK(e.c_eff == doctest::Approx(1.0));
}

TEST_CASE("correctors are periodic, mean free and solve their cell problems") {
  const CellContext ctx(build_cell_mesh(0.25, 8, 2));
  const CellField f =
      ctx.sample(Transformation::radial_growth(2, 0.1, 0.25), MaterialParams::defaults(2), Sources::zero(2), 0.5, center());
  const Correctors c = solve_correctors(ctx, f);
  CHECK(c.max_relative_residual < 1e-10);
  const auto& m = ctx.mesh();
  const Vector w = ctx.space().basis_integrals(ctx.cell_mask(Phase::A));
  for (const auto& t : c.tau_theta) {
    CHECK(std::abs(w.dot(t)) < 1e-12);
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
      if (ctx.vertex_mask(Phase::A)[v]) CHECK(t(v) == t(m.periodic_leader[v]));
  }
  // Periodic test fields: follower values copied from their leaders.
  auto periodic = [&](Vector v, int comps) {
    for (std::size_t x = 0; x < m.vertices.size(); ++x)
      for (int i = 0; i < comps; ++i) v(x * comps + i) = v(m.periodic_leader[x] * comps + i);
    return v;
  };
  for (std::size_t p = 0; p < c.tau_u.size(); ++p) {
    const Vector test = periodic(random_vector(static_cast<int>(2 * m.vertices.size()), 40 + p), 2);
    CHECK(elastic_corrector_residual(ctx, f, c.tau_u[p], static_cast<int>(p), test) < 1e-9);
  }
  const Vector test = periodic(random_vector(static_cast<int>(m.vertices.size()), 99), 1);
  CHECK(thermal_corrector_residual(ctx, f, c.tau_theta[0], 0, test) < 1e-9);
}

TEST_CASE("effective tensors are symmetric, definite and below the Voigt bound") {
  const CellContext ctx(build_cell_mesh(0.25, 16, 2));
  const MaterialParams mat = MaterialParams::defaults(2);
  const auto tr = Transformation::radial_growth(2, 0.1, 0.25);
  for (double t : {0.0, 0.25, 0.5}) {
    const CellField f = ctx.sample(tr, mat, Sources::zero(2), t, center());
    const CellSolution sol{f, solve_correctors(ctx, f)};
    const auto e = compute_effective(ctx, sol, mat, EffectiveOptions{});
    const auto chk = check_effective(e, ctx, f);
    CHECK(chk.ok);
    CHECK(chk.C_minor_defect < 1e-10);
    CHECK(chk.C_major_defect < 1e-10);
    CHECK(chk.C_min_eig > 0.0);
    CHECK(chk.K_min_eig > 0.0);
    CHECK(chk.voigt_slack >= -1e-10);
    // s maps the cell onto itself, so int J = 1 up to quadrature error.
    CHECK(e.Y_A_measure + e.Y_B_measure == doctest::Approx(1.0).epsilon(1e-3));
    if (t > 0.0) CHECK(e.Y_B_measure > ctx.mesh().phase_measure(Phase::B));
  }
}

TEST_CASE("t = 0 of the growing cell equals the static cell") {
  const CellContext ctx(build_cell_mesh(0.25, 16, 2));
  const MaterialParams mat = MaterialParams::defaults(2);
  const auto a = effective_of(ctx, Transformation::radial_growth(2, 0.1, 0.25), mat, 0.0);
  const auto b = effective_of(ctx, Transformation::identity(2), mat, 0.0);
  CHECK((a.C_eff - b.C_eff).norm() < 1e-10);
  CHECK((a.K_eff - b.K_eff).norm() < 1e-10);
  CHECK((a.alpha_eff - b.alpha_eff).norm() < 1e-10);
  CHECK((a.gamma_eff - b.gamma_eff).norm() < 1e-10);
  CHECK(std::abs(a.c_eff - b.c_eff) < 1e-10);
  CHECK((a.H_eff - b.H_eff).norm() < 1e-10);
  // The interface still moves at t = 0: W_eff carries the growth rate.
  CHECK(a.W_eff > 0.0);
  CHECK(std::abs(b.W_eff) < 1e-14);
}

TEST_CASE("both heat-capacity readings agree on the static cell when alpha = gamma") {
  const CellContext ctx(build_cell_mesh(0.25, 8, 2));
  const MaterialParams mat = MaterialParams::defaults(2);
  EffectiveOptions stated, derived;
  derived.interpretation = Interpretation::Derived;
  const auto p = effective_of(ctx, Transformation::identity(2), mat, 0.0, stated);
  const auto d = effective_of(ctx, Transformation::identity(2), mat, 0.0, derived);
  CHECK(p.c_eff == doctest::Approx(d.c_eff).epsilon(1e-10));
  CHECK(parse_interpretation("derived") == Interpretation::Derived);
  CHECK_THROWS_AS(parse_interpretation("other"), Error);
}

TEST_CASE("refined-mesh values of the effective coefficients") {
  // Frozen at n = 64 (identity, r = 0.25, lambda = mu = 1, K = I), computed with this
  // discretization; the n = 16 values are the regression fixture.
  const double C1111_n64 = 1.7953266412594389, K11_n64 = 0.67206071822021451;
  const CellContext ctx(build_cell_mesh(0.25, 16, 2));
  const auto e = effective_of(ctx, Transformation::identity(2), MaterialParams::defaults(2), 0.0);
  CHECK(e.C_eff(0, 0) == doctest::Approx(1.8311297074502764).epsilon(1e-9));
  CHECK(e.K_eff(0, 0) == doctest::Approx(0.67827231544504096).epsilon(1e-9));
  CHECK(std::abs(e.K_eff(0, 0) / K11_n64 - 1.0) < 0.01);
  // C_eff_1111 converges from above; P1 sits 2% high at n = 16.
  CHECK(e.C_eff(0, 0) > C1111_n64);
  CHECK(e.C_eff(0, 0) / C1111_n64 - 1.0 < 0.025);
}

TEST_CASE("cell cache keys on quantized (t, x)") {
  auto ctx = std::make_shared<const CellContext>(build_cell_mesh(0.25, 8, 2));
  CellCache cache(ctx, Transformation::radial_growth(2, 0.1, 0.25), MaterialParams::defaults(2), Sources::zero(2),
                  0.05, 0.125);
  const auto a = cache.get(0.1, center());
  const auto b = cache.get(0.1 + 1e-9, center());
  CHECK(a == b);
  CHECK(cache.misses() == 1);
  const auto c = cache.get(0.2, center());
  CHECK(c != a);
  CHECK(cache.size() == 2);
}

}
