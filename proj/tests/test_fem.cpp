#include "support.hpp"

#include "thermohom/parallel.hpp"

#include <doctest.h>

using namespace thermohom;
using namespace thermohom::testing;

namespace {

auto unit_scalar = [](std::size_t, int, const Vec&) { return 1.0; };
auto unit_matrix = [](std::size_t, int, const Vec&) { return identity_mat(2); };

Vector coordinate(const Mesh& m, int i) {
  Vector x(m.vertices.size());
  for (std::size_t v = 0; v < m.vertices.size(); ++v) x(v) = m.vertices[v](i);
  return x;
}

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("csr assembly sums duplicates in order") {
  const CsrMatrix A = CsrMatrix::from_triplets(2, 3, {{0, 1, 1.0}, {1, 2, 4.0}, {0, 1, 2.0}, {1, 0, -1.0}});
  CHECK(A.nnz() == 3);
  CHECK(A.at(0, 1) == 3.0);
  CHECK(A.at(1, 0) == -1.0);
  CHECK(A.at(0, 0) == 0.0);
  const CsrMatrix T = A.transpose();
  CHECK((T.to_dense() - A.to_dense().transpose()).norm() == 0.0);
  Vector x(3);
  x << 1.0, 2.0, 3.0;
  CHECK((A * x - A.to_dense() * x).norm() == 0.0);
  const CsrMatrix S = add(2.0, CsrMatrix::identity(2), -1.0, CsrMatrix::identity(2));
  CHECK((S.to_dense() - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("mass, stiffness and load against exact integrals") {
  const Mesh m = build_box_mesh(6, 2);
  const P1Space sp(m);
  const CsrMatrix M = sp.mass(unit_scalar);
  const CsrMatrix K = sp.diffusion(unit_matrix);
  const Vector one = Vector::Ones(m.vertices.size());
  const Vector x = coordinate(m, 0), y = coordinate(m, 1);
  CHECK(one.dot(M * one) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x.dot(M * x) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));  // int x^2
  CHECK(x.dot(M * y) == doctest::Approx(0.25).epsilon(1e-14));       // int x y
  CHECK((K * one).norm() < 1e-13);
  CHECK(x.dot(K * x) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x.dot(K * y) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(M.asymmetry() == 0.0);
  CHECK(K.asymmetry() < 1e-15);
  const Vector b = sp.load_scalar([](std::size_t, int, const Vec& p) { return p(0) + 2.0 * p(1); });
  CHECK(b.sum() == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(sp.basis_integrals().sum() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("elasticity annihilates rigid motions") {
  const Mesh m = build_box_mesh(4, 2);
  const P1Space sp(m);
  const Tensor4 C = isotropic_stiffness(2, 1.0, 1.0);
  const CsrMatrix E = sp.elasticity([&](std::size_t, int, const Vec&) { return C; });
  const int n = static_cast<int>(m.vertices.size());
  Vector tx = Vector::Zero(2 * n), rot = Vector::Zero(2 * n), stretch = Vector::Zero(2 * n);
  for (int v = 0; v < n; ++v) {
    tx(2 * v) = 1.0;
    rot(2 * v) = -m.vertices[v](1);
    rot(2 * v + 1) = m.vertices[v](0);
    stretch(2 * v) = m.vertices[v](0);
  }
  CHECK((E * tx).norm() < 1e-13);
  CHECK((E * rot).norm() < 1e-13);
  // u = (x, 0): e = e1 e1^T, C e : e = lambda + 2 mu.
  CHECK(stretch.dot(E * stretch) == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(E.asymmetry() < 1e-15);
}

TEST_CASE("coupling and advection operators") {
  const Mesh m = build_box_mesh(4, 2);
  const P1Space sp(m);
  const int n = static_cast<int>(m.vertices.size());
  const CsrMatrix G = sp.coupling([](std::size_t, int, const Vec&) { return (2.0 * identity_mat(2)).eval(); });
  Vector w = Vector::Zero(2 * n);
  for (int v = 0; v < n; ++v) {
    w(2 * v) = m.vertices[v](0);
    w(2 * v + 1) = m.vertices[v](1);
  }
  // <G 1, w> = int 2 I : grad w = 2 div w = 4.
  CHECK(w.dot(G * Vector::Ones(n)) == doctest::Approx(4.0).epsilon(1e-14));
  Vec vel(2);
  vel << 1.0, 0.0;
  const CsrMatrix Adv = sp.advection(unit_scalar, [&](std::size_t, int, const Vec&) { return vel; });
  // int (v . grad psi) theta with psi = x, theta = 1: int 1 = 1.
  CHECK(coordinate(m, 0).dot(Adv * Vector::Ones(n)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("constrained solves match the bordered dense system") {
  const CellMesh cell = build_cell_mesh(0.25, 8, 2);
  const P1Space sp(cell);
  const int n = static_cast<int>(cell.vertices.size());
  const CsrMatrix K = sp.diffusion(unit_matrix);
  Vector b = random_vector(n, 3);
  ConstraintSet cs(n);
  for (int v = 0; v < n; ++v)
    if (cell.periodic_leader[v] != v) cs.identify(v, cell.periodic_leader[v]);
  cs.zero_mean_weights.push_back(sp.basis_integrals());
  const ReducedSystem sys = apply_constraints(K, b - Vector::Constant(n, b.mean()), cs);
  SolverOptions cg;
  cg.tol = 1e-13;
  cg.allow_dense = false;
  SolverStats stats;
  const Vector x = solve_reduced(sys, cg, &stats);
  CHECK_FALSE(stats.dense);
  const Eigen::MatrixXd B = bordered(sys);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(B.rows());
  rhs.head(sys.b.size()) = sys.b;
  const Eigen::VectorXd ref = B.fullPivLu().solve(rhs);
  const Vector xref = sys.expand(ref.head(sys.b.size()));
  CHECK((x - xref).norm() <= 1e-10 * xref.norm());
  CHECK(std::abs(sp.basis_integrals().dot(x)) < 1e-12);
  for (int v = 0; v < n; ++v) CHECK(x(v) == x(cell.periodic_leader[v]));
}

TEST_CASE("dirichlet pins are honoured") {
  const Mesh m = build_box_mesh(4, 2);
  const P1Space sp(m);
  const int n = static_cast<int>(m.vertices.size());
  ConstraintSet cs(n);
  const auto bnd = boundary_vertices(m);
  for (int v = 0; v < n; ++v)
    if (bnd[v]) cs.pin(v, m.vertices[v](0));
  const Vector x = solve_reduced(apply_constraints(sp.diffusion(unit_matrix), Vector::Zero(n), cs));
  // The harmonic extension of x is x itself.
  CHECK((x - coordinate(m, 0)).norm() < 1e-9);
}

TEST_CASE("manufactured solutions converge at second order") {
  std::vector<double> ep, ee;
  for (int n : {8, 16, 32}) {
    ep.push_back(poisson_error(n));
    ee.push_back(elasticity_error(n));
  }
  for (double p : observed_orders(ep)) CHECK(p == doctest::Approx(2.0).epsilon(0.1));
  for (double p : observed_orders(ee)) CHECK(p == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("parallel loops and sums do not depend on the worker count") {
  const Vector a = random_vector(10007, 11), b = random_vector(10007, 12);
  set_worker_count(1);
  const double s1 = deterministic_dot({a.data(), static_cast<std::size_t>(a.size())},
                                      {b.data(), static_cast<std::size_t>(b.size())});
  set_worker_count(4);
  const double s4 = deterministic_dot({a.data(), static_cast<std::size_t>(a.size())},
                                      {b.data(), static_cast<std::size_t>(b.size())});
  CHECK(s1 == s4);
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; });
  set_worker_count(1);
  for (int h : hit) CHECK(h == 1);
}

}
