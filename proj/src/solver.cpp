#include "thermohom/fem.hpp"
#include "thermohom/parallel.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace thermohom {

namespace {

double dot(const Vector& a, const Vector& b) {
  return deterministic_dot({a.data(), static_cast<std::size_t>(a.size())}, {b.data(), static_cast<std::size_t>(b.size())});
}

// Orthonormal basis of the zero-mean rows, for the projector I - Q Q^T.
std::vector<Vector> orthonormalize(const std::vector<Vector>& rows) {
  std::vector<Vector> q;
  for (Vector v : rows) {
    for (const Vector& u : q) v -= dot(u, v) * u;
    const double n = std::sqrt(dot(v, v));
    if (n > 1e-14) q.push_back(v / n);
  }
  return q;
}

void project(const std::vector<Vector>& q, Vector& v) {
  for (const Vector& u : q) v -= dot(u, v) * u;
}

std::string history_tail(const std::vector<double>& h) {
  std::ostringstream os;
  os << "residual history (last entries):";
  const std::size_t start = h.size() > 8 ? h.size() - 8 : 0;
  for (std::size_t i = start; i < h.size(); ++i) os << ' ' << h[i];
  return os.str();
}

Vector solve_dense(const CsrMatrix& A, const Vector& b, const std::vector<Vector>& means) {
  const int n = A.rows;
  if (means.empty()) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A.to_dense());
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
      throw SolverError("matrix is not positive definite (dense factorization)");
    return ldlt.solve(b);
  }
  const int k = static_cast<int>(means.size());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n + k, n + k);
  B.topLeftCorner(n, n) = A.to_dense();
  for (int j = 0; j < k; ++j) {
    B.block(0, n + j, n, 1) = means[j];
    B.block(n + j, 0, 1, n) = means[j].transpose();
  }
  Vector rhs = Vector::Zero(n + k);
  rhs.head(n) = b;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  if (!lu.isInvertible()) throw SolverError("bordered system is singular");
  return lu.solve(rhs).head(n);
}

}  // namespace

Vector solve_spd(const CsrMatrix& A, const Vector& b, const SolverOptions& opt, SolverStats* stats, const Vector* x0,
                 const std::vector<Vector>& means) {
  const int n = A.rows;
  if (A.cols != n || b.size() != n) throw SolverError("solve_spd: size mismatch");
  SolverStats local;
  SolverStats& st = stats ? *stats : local;
  st = SolverStats{};
  if (n == 0) return Vector();

  if (opt.allow_dense && n < opt.dense_threshold) {
    st.dense = true;
    Vector x = solve_dense(A, b, means);
    Vector r = b - A * x;
    if (!means.empty()) {
      auto q = orthonormalize(means);
      project(q, r);
    }
    const double bn = b.norm();
    st.relative_residual = bn > 0.0 ? r.norm() / bn : r.norm();
    return x;
  }

  const auto q = orthonormalize(means);
  const Vector diag = A.diagonal_entries();
  for (int i = 0; i < n; ++i)
    if (!(diag(i) > 0.0)) throw SolverError("non-positive diagonal entry in SPD solve at row " + std::to_string(i));
  const Vector inv_diag = diag.cwiseInverse();

  Vector pb = b;
  project(q, pb);
  const double bnorm = std::sqrt(dot(pb, pb));
  Vector x = (x0 && x0->size() == n) ? *x0 : Vector::Zero(n);
  project(q, x);
  if (bnorm == 0.0) {
    st.relative_residual = 0.0;
    return Vector::Zero(n);
  }
  Vector r = pb - A * x;
  project(q, r);
  double rn = std::sqrt(dot(r, r));
  st.history.push_back(rn / bnorm);
  if (rn <= opt.tol * bnorm) {
    st.relative_residual = rn / bnorm;
    return x;
  }
  Vector z = inv_diag.cwiseProduct(r);
  project(q, z);
  Vector p = z;
  double rz = dot(r, z);
  Vector Ap(n);
  for (int it = 1; it <= opt.max_iter; ++it) {
    A.multiply(p.data(), Ap.data());
    project(q, Ap);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) {
      std::ostringstream os;
      os << "negative curvature in CG at iteration " << it << " (p^T A p = " << pAp << "); " << history_tail(st.history);
      throw SolverError(os.str());
    }
    const double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    rn = std::sqrt(dot(r, r));
    st.history.push_back(rn / bnorm);
    st.iterations = it;
    if (rn <= opt.tol * bnorm) {
      st.relative_residual = rn / bnorm;
      return x;
    }
    z = inv_diag.cwiseProduct(r);
    project(q, z);
    const double rz_new = dot(r, z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::ostringstream os;
  os << "CG did not reach tolerance " << opt.tol << " in " << opt.max_iter << " iterations; " << history_tail(st.history);
  throw SolverError(os.str());
}

Vector solve_reduced(const ReducedSystem& sys, const SolverOptions& opt, SolverStats* stats, const Vector* x0_full) {
  Vector x0;
  const Vector* px0 = nullptr;
  if (x0_full) {
    x0 = Vector::Zero(sys.A.rows);
    for (int i = 0; i < sys.full_size; ++i)
      if (sys.full_to_reduced[i] >= 0) x0(sys.full_to_reduced[i]) = (*x0_full)(i);
    px0 = &x0;
  }
  return sys.expand(solve_spd(sys.A, sys.b, opt, stats, px0, sys.means));
}

Vector solve_general(const CsrMatrix& A, const Vector& b) {
  Eigen::SparseMatrix<double> M = A.to_eigen();
  M.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(M);
  lu.factorize(M);
  if (lu.info() != Eigen::Success) throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage());
  Vector x = lu.solve(b);
  if (lu.info() != Eigen::Success) throw SolverError("sparse LU solve failed");
  return x;
}

}  // namespace thermohom
