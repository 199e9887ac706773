#include "thermohom/fem.hpp"
#include "thermohom/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace thermohom {

CsrMatrix CsrMatrix::from_triplets(int rows, int cols, std::vector<Triplet> t) {
  std::stable_sort(t.begin(), t.end(),
                   [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  CsrMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t k = 0; k < t.size();) {
    const Triplet& first = t[k];
    if (first.row < 0 || first.row >= rows || first.col < 0 || first.col >= cols)
      throw SolverError("triplet index out of range");
    double v = 0.0;
    std::size_t j = k;
    for (; j < t.size() && t[j].row == first.row && t[j].col == first.col; ++j) v += t[j].value;
    m.col_idx.push_back(first.col);
    m.values.push_back(v);
    ++m.row_ptr[first.row + 1];
    k = j;
  }
  for (int r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

CsrMatrix CsrMatrix::identity(int n) {
  Vector d = Vector::Ones(n);
  return diagonal(d);
}

CsrMatrix CsrMatrix::diagonal(const Vector& d) {
  CsrMatrix m;
  m.rows = m.cols = static_cast<int>(d.size());
  m.row_ptr.resize(m.rows + 1);
  for (int i = 0; i <= m.rows; ++i) m.row_ptr[i] = i;
  m.col_idx.resize(m.rows);
  m.values.resize(m.rows);
  for (int i = 0; i < m.rows; ++i) {
    m.col_idx[i] = i;
    m.values[i] = d(i);
  }
  return m;
}

double CsrMatrix::at(int r, int c) const {
  auto b = col_idx.begin() + row_ptr[r], e = col_idx.begin() + row_ptr[r + 1];
  auto it = std::lower_bound(b, e, c);
  return (it != e && *it == c) ? values[it - col_idx.begin()] : 0.0;
}

void CsrMatrix::multiply(const double* x, double* y) const {
  parallel_ranges(static_cast<std::size_t>(rows), [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      double s = 0.0;
      for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += values[k] * x[col_idx[k]];
      y[r] = s;
    }
  });
}

Vector CsrMatrix::operator*(const Vector& x) const {
  if (x.size() != cols) throw SolverError("matrix-vector size mismatch");
  Vector y(rows);
  multiply(x.data(), y.data());
  return y;
}

Vector CsrMatrix::diagonal_entries() const {
  Vector d = Vector::Zero(rows);
  for (int r = 0; r < std::min(rows, cols); ++r) d(r) = at(r, r);
  return d;
}

CsrMatrix CsrMatrix::transpose() const {
  CsrMatrix t;
  t.rows = cols;
  t.cols = rows;
  t.row_ptr.assign(cols + 1, 0);
  for (int c : col_idx) ++t.row_ptr[c + 1];
  for (int c = 0; c < cols; ++c) t.row_ptr[c + 1] += t.row_ptr[c];
  t.col_idx.resize(nnz());
  t.values.resize(nnz());
  std::vector<int> fill(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) {
      const int pos = fill[col_idx[k]]++;
      t.col_idx[pos] = r;
      t.values[pos] = values[k];
    }
  return t;
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) d(r, col_idx[k]) += values[k];
  return d;
}

Eigen::SparseMatrix<double> CsrMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(nnz());
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) t.emplace_back(r, col_idx[k], values[k]);
  Eigen::SparseMatrix<double> m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

double CsrMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double CsrMatrix::asymmetry() const {
  if (rows != cols) return std::numeric_limits<double>::infinity();
  const double scale = max_abs();
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) worst = std::max(worst, std::abs(values[k] - at(col_idx[k], r)));
  return worst / scale;
}

bool CsrMatrix::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void CsrMatrix::scale(double s) {
  for (double& v : values) v *= s;
}

void CsrMatrix::write_coordinate(std::ostream& out) const {
  out << "%%MatrixMarket matrix coordinate real general\n" << rows << ' ' << cols << ' ' << nnz() << "\n";
  out << std::setprecision(17);
  for (int r = 0; r < rows; ++r)
    for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) out << r + 1 << ' ' << col_idx[k] + 1 << ' ' << values[k] << "\n";
}

CsrMatrix add(double a, const CsrMatrix& A, double b, const CsrMatrix& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw SolverError("matrix sum size mismatch");
  CsrMatrix m;
  m.rows = A.rows;
  m.cols = A.cols;
  m.row_ptr.assign(A.rows + 1, 0);
  m.col_idx.reserve(std::max(A.nnz(), B.nnz()));
  m.values.reserve(std::max(A.nnz(), B.nnz()));
  for (int r = 0; r < A.rows; ++r) {
    int i = A.row_ptr[r], j = B.row_ptr[r];
    const int ie = A.row_ptr[r + 1], je = B.row_ptr[r + 1];
    while (i < ie || j < je) {
      if (j >= je || (i < ie && A.col_idx[i] < B.col_idx[j])) {
        m.col_idx.push_back(A.col_idx[i]);
        m.values.push_back(a * A.values[i++]);
      } else if (i >= ie || B.col_idx[j] < A.col_idx[i]) {
        m.col_idx.push_back(B.col_idx[j]);
        m.values.push_back(b * B.values[j++]);
      } else {
        m.col_idx.push_back(A.col_idx[i]);
        m.values.push_back(a * A.values[i++] + b * B.values[j++]);
      }
    }
    m.row_ptr[r + 1] = static_cast<int>(m.col_idx.size());
  }
  return m;
}

}  // namespace thermohom
