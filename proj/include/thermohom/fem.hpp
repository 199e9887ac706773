#pragma once

#include "thermohom/mesh.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

namespace thermohom {

class SolverError : public Error {
public:
  using Error::Error;
};

using Vector = Eigen::VectorXd;

struct Triplet {
  int row;
  int col;
  double value;
};

// Compressed row storage. Rows have strictly increasing column indices.
struct CsrMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<int> row_ptr{0};
  std::vector<int> col_idx;
  std::vector<double> values;

  // Duplicates are summed in input order, so equal inputs give equal bits.
  static CsrMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets);
  static CsrMatrix identity(int n);
  static CsrMatrix diagonal(const Vector& d);

  std::size_t nnz() const { return values.size(); }
  double at(int r, int c) const;
  void multiply(const double* x, double* y) const;
  Vector operator*(const Vector& x) const;
  Vector diagonal_entries() const;
  CsrMatrix transpose() const;
  Eigen::MatrixXd to_dense() const;
  Eigen::SparseMatrix<double> to_eigen() const;
  // max |a_ij - a_ji| / max |a_ij|
  double asymmetry() const;
  double max_abs() const;
  bool all_finite() const;
  void scale(double s);
  void write_coordinate(std::ostream& out) const;
};

// a A + b B
CsrMatrix add(double a, const CsrMatrix& A, double b, const CsrMatrix& B);

// ---------------------------------------------------------------- assembly

// Order-2 simplex rule: 3 points (triangle) / 4 points (tetrahedron).
int quadrature_points(int d);
std::array<double, 4> quadrature_bary(int d, int q);
double quadrature_weight(int d);  // fraction of the element volume

template <class T>
using QpFn = std::function<T(std::size_t cell, int q, const Vec& x)>;

// Piecewise-linear space on a mesh. Vector fields interleave components:
// dof = vertex * d + component.
class P1Space {
public:
  explicit P1Space(const Mesh& mesh);

  const Mesh& mesh() const { return *mesh_; }
  int dim() const { return mesh_->dim; }
  int nq() const { return nq_; }
  std::size_t vertex_count() const { return mesh_->vertices.size(); }
  std::size_t cell_count() const { return mesh_->cells.size(); }
  double volume(std::size_t c) const { return volume_[c]; }
  // Gradient of the barycentric function of local vertex a.
  Vec grad(std::size_t c, int a) const;
  Vec qp_position(std::size_t c, int q) const;
  double qp_weight(std::size_t c) const { return volume_[c] * quadrature_weight(dim()); }

  // Empty mask = every cell.
  using Mask = std::vector<char>;

  CsrMatrix diffusion(const QpFn<Mat>& K, const Mask& mask = {}) const;
  CsrMatrix mass(const QpFn<double>& c, const Mask& mask = {}) const;
  // int c (v . grad psi) theta: rows test psi, cols trial theta.
  CsrMatrix advection(const QpFn<double>& c, const QpFn<Vec>& v, const Mask& mask = {}) const;
  CsrMatrix elasticity(const QpFn<Tensor4>& C, const Mask& mask = {}) const;
  // <G theta, w> = int theta alpha : grad w. Rows vector dofs, cols scalar dofs.
  CsrMatrix coupling(const QpFn<Mat>& alpha, const Mask& mask = {}) const;
  // int (gamma : grad u) (v . grad psi): rows scalar, cols vector dofs.
  CsrMatrix coupling_advection(const QpFn<Mat>& gamma, const QpFn<Vec>& v, const Mask& mask = {}) const;

  Vector load_scalar(const QpFn<double>& f, const Mask& mask = {}) const;
  Vector load_vector(const QpFn<Vec>& f, const Mask& mask = {}) const;
  // int g : grad w for a matrix-valued g (vector test functions).
  Vector load_divergence(const QpFn<Mat>& g, const Mask& mask = {}) const;

  // Facet rules: midpoint (d=2) / centroid (d=3). fn(facet, centroid, n0).
  Vector interface_load_scalar(const std::function<double(std::size_t, const Vec&, const Vec&)>& g) const;
  Vector interface_load_vector(const std::function<Vec(std::size_t, const Vec&, const Vec&)>& g) const;

  // int phi_i over the masked cells.
  Vector basis_integrals(const Mask& mask = {}) const;

  // P1 interpolation at a point inside cell c.
  std::array<double, 4> barycentric(std::size_t c, const Vec& x) const;

  // Evaluation of nodal fields (vector fields interleaved as above).
  Vec grad_scalar(std::size_t c, const Vector& u) const;
  Mat grad_vector(std::size_t c, const Vector& u) const;  // (grad u)_ik = d_k u_i
  double scalar_at_qp(std::size_t c, int q, const Vector& u) const;
  Vec vector_at_qp(std::size_t c, int q, const Vector& u) const;

private:
  struct Pattern {
    CsrMatrix skeleton;
    std::vector<int> scatter;  // per cell, block-row-major local entries -> CSR index
    int block = 0;
  };
  const Pattern& pattern(int rc, int cc) const;
  CsrMatrix scatter(const Pattern& p, const std::vector<double>& local) const;

  const Mesh* mesh_;
  int nq_;
  std::vector<double> volume_;
  std::vector<double> grads_;  // per cell (d+1) x d
  mutable std::map<std::pair<int, int>, std::shared_ptr<Pattern>> patterns_;
  std::shared_ptr<std::mutex> pattern_mutex_;
};

// ------------------------------------------------------------ constraints

// Dirichlet pins, periodic identifications and zero-mean conditions.
struct ConstraintSet {
  int n = 0;
  std::map<int, double> pins;
  std::vector<int> leader;                 // -1: no identification
  std::vector<Vector> zero_mean_weights;   // sum_i w_i x_i = 0 for each entry
  std::vector<char> inactive;              // dofs not present in the problem (pinned to 0)

  explicit ConstraintSet(int n_ = 0);
  void pin(int dof, double value);
  void identify(int follower, int leader_dof);
  void validate() const;
};

struct ReducedSystem {
  CsrMatrix A;
  Vector b;
  std::vector<int> full_to_reduced;  // -1 for pinned/inactive
  Vector offset;                     // full-space pin values
  std::vector<Vector> means;         // zero-mean rows in reduced coordinates
  int full_size = 0;

  Vector expand(const Vector& reduced) const;
  Vector restrict_vector(const Vector& full) const;  // P^T v
};

ReducedSystem apply_constraints(const CsrMatrix& A, const Vector& b, const ConstraintSet& cs);
// Same reduction pattern without a right-hand side (operators only).
CsrMatrix reduce_matrix(const CsrMatrix& A, const ConstraintSet& cs, const std::vector<int>& full_to_reduced);
std::vector<int> reduction_map(const ConstraintSet& cs, int* reduced_size = nullptr);

// Bordered matrix [[A, C], [C^T, 0]] with one multiplier per zero-mean row.
Eigen::MatrixXd bordered(const ReducedSystem& sys);

// ------------------------------------------------------------------ solver

struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 20000;
  int dense_threshold = 500;  // direct dense factorization below this size
  bool allow_dense = true;
};

struct SolverStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool dense = false;
  std::vector<double> history;
};

// Jacobi-preconditioned CG; with zero-mean rows the iteration runs on the
// constrained subspace (equivalent to the multiplier formulation).
Vector solve_spd(const CsrMatrix& A, const Vector& b, const SolverOptions& opt = {}, SolverStats* stats = nullptr,
                 const Vector* x0 = nullptr, const std::vector<Vector>& means = {});

// Solves a reduced system and expands it to the full space.
Vector solve_reduced(const ReducedSystem& sys, const SolverOptions& opt = {}, SolverStats* stats = nullptr,
                     const Vector* x0_full = nullptr);

// Sparse LU for non-symmetric operators.
Vector solve_general(const CsrMatrix& A, const Vector& b);

}  // namespace thermohom
