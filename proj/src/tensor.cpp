#include "thermohom/tensor.hpp"

#include <cmath>

namespace thermohom {

int sym_pair_count(int d) { return d * (d + 1) / 2; }

std::pair<int, int> sym_pair(int d, int p) {
  static constexpr std::pair<int, int> k2[] = {{0, 0}, {1, 1}, {0, 1}};
  static constexpr std::pair<int, int> k3[] = {{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}};
  if (p < 0 || p >= sym_pair_count(d)) throw Error("symmetric pair index out of range");
  return d == 2 ? k2[p] : k3[p];
}

Mat unit_strain(int d, int p) {
  auto [j, k] = sym_pair(d, p);
  Mat E = Mat::Zero(d, d);
  E(j, k) += 0.5;
  E(k, j) += 0.5;
  return E;
}

Tensor4 isotropic_stiffness(int d, double lambda, double mu) {
  Tensor4 C = zero_tensor(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double v = 0.0;
          if (i == j && k == l) v += lambda;
          if (i == k && j == l) v += mu;
          if (i == l && j == k) v += mu;
          at(C, d, i, j, k, l) = v;
        }
  return C;
}

Mat contract(const Tensor4& C, const Mat& M) {
  const int d = static_cast<int>(M.rows());
  Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 9, 1> m(d * d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) m(k * d + l) = M(k, l);
  Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 9, 1> r = C * m;
  Mat out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = r(i * d + j);
  return out;
}

double double_dot(const Mat& a, const Mat& b) { return a.cwiseProduct(b).sum(); }

Mat sym(const Mat& M) { return 0.5 * (M + M.transpose()); }

Tensor4 minor_symmetrize(const Tensor4& T) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(T.rows()))));
  Tensor4 S = zero_tensor(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l)
          at(S, d, i, j, k, l) = 0.25 * (at(T, d, i, j, k, l) + at(T, d, j, i, k, l) +
                                         at(T, d, i, j, l, k) + at(T, d, j, i, l, k));
  return S;
}

Tensor4 symmetrizer(const Mat& G) {
  const int d = static_cast<int>(G.rows());
  Tensor4 A = zero_tensor(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double v = 0.0;
          if (j == l) v += 0.5 * G(i, k);
          if (i == l) v += 0.5 * G(j, k);
          at(A, d, i, j, k, l) = v;
        }
  return A;
}

double minor_symmetry_defect(const Tensor4& T) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(T.rows()))));
  double defect = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          defect = std::max(defect, std::abs(at(T, d, i, j, k, l) - at(T, d, j, i, k, l)));
          defect = std::max(defect, std::abs(at(T, d, i, j, k, l) - at(T, d, i, j, l, k)));
        }
  return defect;
}

double major_symmetry_defect(const Tensor4& T) { return (T - T.transpose()).cwiseAbs().maxCoeff(); }

Eigen::MatrixXd mandel(const Tensor4& T) {
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(T.rows()))));
  const int n = sym_pair_count(d);
  Eigen::MatrixXd M(n, n);
  for (int p = 0; p < n; ++p) {
    auto [i, j] = sym_pair(d, p);
    const double wp = (i == j) ? 1.0 : std::sqrt(2.0);
    for (int q = 0; q < n; ++q) {
      auto [k, l] = sym_pair(d, q);
      const double wq = (k == l) ? 1.0 : std::sqrt(2.0);
      M(p, q) = wp * wq * at(T, d, i, j, k, l);
    }
  }
  return M;
}

double min_mandel_eigenvalue(const Tensor4& T) {
  Eigen::MatrixXd M = mandel(T);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Mat inverse(const Mat& M) {
  // Eigen's closed-form inverse for 2x2 / 3x3 via the fixed-size path.
  if (M.rows() == 2) {
    Eigen::Matrix2d m = M;
    return Mat(m.inverse());
  }
  Eigen::Matrix3d m = M;
  return Mat(m.inverse());
}

}  // namespace thermohom
