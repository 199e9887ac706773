#pragma once

#include "thermohom/problem.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace thermohom::testing {

inline constexpr double kPi = std::numbers::pi;

// Degree-5 seven-point triangle rule (barycentric point, weight as a fraction of the area).
struct TriRule {
  std::array<double, 3> b;
  double w;
};

inline std::vector<TriRule> triangle_rule7() {
  const double a1 = 0.059715871789770, b1 = 0.470142064105115, w1 = 0.132394152788506;
  const double a2 = 0.797426985353087, b2 = 0.101286507323456, w2 = 0.125939180544827;
  return {{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 0.225},
          {{a1, b1, b1}, w1}, {{b1, a1, b1}, w1}, {{b1, b1, a1}, w1},
          {{a2, b2, b2}, w2}, {{b2, a2, b2}, w2}, {{b2, b2, a2}, w2}};
}

// L2 norm of (u_h - exact) for a P1 field with `comps` interleaved components on a triangle mesh.
inline double l2_error(const Mesh& mesh, const Vector& uh, int comps,
                       const std::function<double(const Vec&, int)>& exact) {
  double sum = 0.0;
  const auto rule = triangle_rule7();
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const double area = std::abs(mesh.cell_volume(c));
    for (const auto& r : rule) {
      Vec x = Vec::Zero(2);
      for (int a = 0; a < 3; ++a) x += r.b[a] * mesh.vertices[mesh.cells[c][a]];
      for (int i = 0; i < comps; ++i) {
        double v = 0.0;
        for (int a = 0; a < 3; ++a) v += r.b[a] * uh(mesh.cells[c][a] * comps + i);
        const double e = v - exact(x, i);
        sum += r.w * area * e * e;
      }
    }
  }
  return std::sqrt(sum);
}

// -Laplace u = f on the unit square, u = sin(pi x) sin(pi y), homogeneous Dirichlet data.
inline double poisson_error(int n) {
  const Mesh mesh = build_box_mesh(n, 2);
  const P1Space sp(mesh);
  const CsrMatrix A = sp.diffusion([](std::size_t, int, const Vec&) { return identity_mat(2); });
  const Vector b = sp.load_scalar([](std::size_t, int, const Vec& x) {
    return 2.0 * kPi * kPi * std::sin(kPi * x(0)) * std::sin(kPi * x(1));
  });
  ConstraintSet cs(static_cast<int>(mesh.vertices.size()));
  const auto bnd = boundary_vertices(mesh);
  for (std::size_t v = 0; v < bnd.size(); ++v)
    if (bnd[v]) cs.pin(static_cast<int>(v), 0.0);
  SolverOptions opt;
  opt.tol = 1e-13;
  opt.allow_dense = false;
  const Vector u = solve_reduced(apply_constraints(A, b, cs), opt);
  return l2_error(mesh, u, 1, [](const Vec& x, int) { return std::sin(kPi * x(0)) * std::sin(kPi * x(1)); });
}

// -div(C e(u)) = f, lambda = mu = 1, u = (s, s) with s = sin(pi x) sin(pi y):
// f_i = 2 pi^2 mu s + (lambda + mu) pi^2 (s - cos(pi x) cos(pi y)).
inline double elasticity_error(int n) {
  const Mesh mesh = build_box_mesh(n, 2);
  const P1Space sp(mesh);
  const Tensor4 C = isotropic_stiffness(2, 1.0, 1.0);
  const CsrMatrix A = sp.elasticity([&](std::size_t, int, const Vec&) { return C; });
  const Vector b = sp.load_vector([](std::size_t, int, const Vec& x) {
    const double s = std::sin(kPi * x(0)) * std::sin(kPi * x(1));
    const double c = std::cos(kPi * x(0)) * std::cos(kPi * x(1));
    const double f = 2.0 * kPi * kPi * s + 2.0 * kPi * kPi * (s - c);
    return Vec::Constant(2, f).eval();
  });
  ConstraintSet cs(static_cast<int>(2 * mesh.vertices.size()));
  const auto bnd = boundary_vertices(mesh);
  for (std::size_t v = 0; v < bnd.size(); ++v)
    if (bnd[v])
      for (int i = 0; i < 2; ++i) cs.pin(static_cast<int>(2 * v + i), 0.0);
  SolverOptions opt;
  opt.tol = 1e-13;
  opt.allow_dense = false;
  const Vector u = solve_reduced(apply_constraints(A, b, cs), opt);
  return l2_error(mesh, u, 2, [](const Vec& x, int) { return std::sin(kPi * x(0)) * std::sin(kPi * x(1)); });
}

inline std::vector<double> observed_orders(const std::vector<double>& errors) {
  std::vector<double> p;
  for (std::size_t i = 1; i < errors.size(); ++i) p.push_back(std::log2(errors[i - 1] / errors[i]));
  return p;
}

// Small, fast setup for solver-level tests.
inline ModelSetup small_setup(bool identity) {
  ModelSetup m;
  m.cell_n = 8;
  m.macro_n = 8;
  m.T = 0.1;
  m.dt = 0.05;
  if (identity) m.transformation = Transformation::identity(2);
  return m;
}

inline ModelSetup decoupled(ModelSetup m) {
  m.material.alpha = {0.0, 0.0};
  m.material.gamma = {0.0, 0.0};
  m.material.sigma0 = 0.0;
  m.material.L = 0.0;
  return m;
}

inline Vector random_vector(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(rng);
  return v;
}

}  // namespace thermohom::testing
