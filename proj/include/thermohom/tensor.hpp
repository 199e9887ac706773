#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace thermohom {

inline constexpr int kMaxDim = 3;

// Small fixed-capacity types: runtime dimension d in {2, 3}, no heap allocation.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 3, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 3, 3>;

// Rank-4 tensor flattened as a d^2 x d^2 matrix, T(i*d + j, k*d + l) = T_ijkl.
using Tensor4 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 9, 9>;

enum class Phase : unsigned char { A = 0, B = 1 };

inline int phase_index(Phase p) { return static_cast<int>(p); }
inline const char* phase_name(Phase p) { return p == Phase::A ? "A" : "B"; }

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void check_dim(int d) {
  if (d != 2 && d != 3) throw Error("dimension must be 2 or 3, got " + std::to_string(d));
}

inline Vec zero_vec(int d) { return Vec::Zero(d); }
inline Mat identity_mat(int d) { return Mat::Identity(d, d); }
inline Tensor4 zero_tensor(int d) { return Tensor4::Zero(d * d, d * d); }

inline double& at(Tensor4& T, int d, int i, int j, int k, int l) { return T(i * d + j, k * d + l); }
inline double at(const Tensor4& T, int d, int i, int j, int k, int l) { return T(i * d + j, k * d + l); }

// Independent symmetric index pairs (j <= k) in Voigt order.
int sym_pair_count(int d);
std::pair<int, int> sym_pair(int d, int p);

// E^{jk} = (e_j e_k^T + e_k e_j^T) / 2.
Mat unit_strain(int d, int p);

Tensor4 isotropic_stiffness(int d, double lambda, double mu);

// (C : M)_ij = C_ijkl M_kl
Mat contract(const Tensor4& C, const Mat& M);
double double_dot(const Mat& a, const Mat& b);
Mat sym(const Mat& M);

// Projects onto the minor-symmetric part; leaves the action on symmetric
// matrices unchanged.
Tensor4 minor_symmetrize(const Tensor4& T);

// Symmetrizer A B = sym(G B), with G = F^{-T}.
Tensor4 symmetrizer(const Mat& G);

double minor_symmetry_defect(const Tensor4& T);
double major_symmetry_defect(const Tensor4& T);

// Mandel representation on symmetric matrices (3x3 for d=2, 6x6 for d=3).
Eigen::MatrixXd mandel(const Tensor4& T);
double min_mandel_eigenvalue(const Tensor4& T);

Mat inverse(const Mat& M);

}  // namespace thermohom
