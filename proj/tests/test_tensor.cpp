#include "thermohom/tensor.hpp"

#include <doctest.h>

using namespace thermohom;

TEST_SUITE("tensor") {

TEST_CASE("isotropic stiffness entries and symmetries") {
  for (int d : {2, 3}) {
    const Tensor4 C = isotropic_stiffness(d, 2.0, 3.0);
    CHECK(at(C, d, 0, 0, 0, 0) == doctest::Approx(2.0 + 2 * 3.0));
    CHECK(at(C, d, 0, 0, 1, 1) == doctest::Approx(2.0));
    CHECK(at(C, d, 0, 1, 0, 1) == doctest::Approx(3.0));
    CHECK(at(C, d, 0, 1, 1, 0) == doctest::Approx(3.0));
    CHECK(minor_symmetry_defect(C) == 0.0);
    CHECK(major_symmetry_defect(C) == 0.0);
    // Mandel spectrum: 2 mu (deviatoric) and d lambda + 2 mu (volumetric).
    CHECK(min_mandel_eigenvalue(C) == doctest::Approx(6.0));
    const Mat s = contract(C, identity_mat(d));
    CHECK((s - (d * 2.0 + 2 * 3.0) * identity_mat(d)).norm() < 1e-14);
  }
}

TEST_CASE("symmetric pairs and unit strains") {
  CHECK(sym_pair_count(2) == 3);
  CHECK(sym_pair_count(3) == 6);
  for (int d : {2, 3}) {
    Mat sum = Mat::Zero(d, d);
    for (int p = 0; p < sym_pair_count(d); ++p) {
      const auto [j, k] = sym_pair(d, p);
      CHECK(j <= k);
      const Mat E = unit_strain(d, p);
      CHECK((E - E.transpose()).norm() == 0.0);
      CHECK(E(j, k) == doctest::Approx(j == k ? 1.0 : 0.5));
      sum += E;
    }
    CHECK(sum.trace() == doctest::Approx(d));
  }
}

TEST_CASE("symmetrizer acts as sym(G B)") {
  Mat G(2, 2);
  G << 1.2, 0.3, -0.1, 0.9;
  Mat B(2, 2);
  B << 0.4, -0.7, 0.2, 1.1;
  const Tensor4 A = symmetrizer(G);
  CHECK((contract(A, B) - sym(G * B)).norm() < 1e-14);
  const Tensor4 I = symmetrizer(identity_mat(2));
  const Mat S = sym(B);
  CHECK((contract(I, S) - S).norm() < 1e-15);
}

TEST_CASE("minor symmetrization keeps the action on symmetric matrices") {
  Tensor4 T = isotropic_stiffness(2, 1.0, 1.0);
  at(T, 2, 0, 1, 0, 0) += 0.5;
  at(T, 2, 1, 0, 0, 0) -= 0.5;
  const Tensor4 S = minor_symmetrize(T);
  CHECK(minor_symmetry_defect(S) < 1e-15);
  Mat M(2, 2);
  M << 1.0, 0.25, 0.25, -2.0;
  CHECK((contract(S, M) - sym(contract(T, M))).norm() < 1e-14);
}

TEST_CASE("inverse and double dot") {
  Mat M(3, 3);
  M << 2, 1, 0, 1, 3, 1, 0, 1, 4;
  CHECK((inverse(M) * M - identity_mat(3)).norm() < 1e-14);
  CHECK(double_dot(identity_mat(3), M) == doctest::Approx(9.0));
  CHECK_THROWS_AS(check_dim(4), Error);
}

}
