#include "thermohom/fem.hpp"

#include <cmath>

namespace thermohom {

ConstraintSet::ConstraintSet(int n_) : n(n_), leader(n_, -1), inactive(n_, 0) {}

void ConstraintSet::pin(int dof, double value) {
  if (dof < 0 || dof >= n) throw SolverError("pinned dof out of range");
  pins[dof] = value;
}

void ConstraintSet::identify(int follower, int leader_dof) {
  if (follower < 0 || follower >= n || leader_dof < 0 || leader_dof >= n)
    throw SolverError("identified dof out of range");
  if (follower != leader_dof) leader[follower] = leader_dof;
}

void ConstraintSet::validate() const {
  if (static_cast<int>(leader.size()) != n || static_cast<int>(inactive.size()) != n)
    throw SolverError("constraint set sized inconsistently");
  for (int i = 0; i < n; ++i) {
    if (leader[i] < 0) continue;
    if (pins.count(i)) throw SolverError("dof " + std::to_string(i) + " is both pinned and identified");
    int steps = 0;
    for (int j = i; leader[j] >= 0; j = leader[j])
      if (++steps > n) throw SolverError("cyclic periodic identification at dof " + std::to_string(i));
  }
  for (const auto& w : zero_mean_weights)
    if (w.size() != n) throw SolverError("zero-mean weight vector has wrong length");
}

namespace {

int root_of(const ConstraintSet& cs, int i) {
  while (cs.leader[i] >= 0) i = cs.leader[i];
  return i;
}

}  // namespace

std::vector<int> reduction_map(const ConstraintSet& cs, int* reduced_size) {
  cs.validate();
  std::vector<int> map(cs.n, -1);
  int m = 0;
  for (int i = 0; i < cs.n; ++i) {
    if (cs.leader[i] >= 0) continue;
    if (cs.inactive[i] || cs.pins.count(i)) continue;
    map[i] = m++;
  }
  for (int i = 0; i < cs.n; ++i)
    if (cs.leader[i] >= 0) {
      const int r = root_of(cs, i);
      map[i] = cs.inactive[i] ? -1 : map[r];
    }
  if (reduced_size) *reduced_size = m;
  return map;
}

Vector ReducedSystem::expand(const Vector& reduced) const {
  Vector full = offset;
  for (int i = 0; i < full_size; ++i)
    if (full_to_reduced[i] >= 0) full(i) = reduced(full_to_reduced[i]);
  return full;
}

Vector ReducedSystem::restrict_vector(const Vector& full) const {
  Vector r = Vector::Zero(A.rows);
  for (int i = 0; i < full_size; ++i)
    if (full_to_reduced[i] >= 0) r(full_to_reduced[i]) += full(i);
  return r;
}

CsrMatrix reduce_matrix(const CsrMatrix& A, const ConstraintSet& cs, const std::vector<int>& map) {
  int m = 0;
  for (int v : map) m = std::max(m, v + 1);
  std::vector<Triplet> t;
  t.reserve(A.nnz());
  for (int r = 0; r < A.rows; ++r) {
    const int rr = map[r];
    if (rr < 0) continue;
    for (int k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
      const int cc = map[A.col_idx[k]];
      if (cc >= 0) t.push_back({rr, cc, A.values[k]});
    }
  }
  (void)cs;
  return CsrMatrix::from_triplets(m, m, std::move(t));
}

ReducedSystem apply_constraints(const CsrMatrix& A, const Vector& b, const ConstraintSet& cs) {
  if (A.rows != cs.n || A.cols != cs.n || b.size() != cs.n) throw SolverError("constraint set does not match system size");
  ReducedSystem sys;
  int m = 0;
  sys.full_to_reduced = reduction_map(cs, &m);
  sys.full_size = cs.n;
  sys.offset = Vector::Zero(cs.n);
  for (int i = 0; i < cs.n; ++i) {
    if (cs.inactive[i]) continue;
    const int r = root_of(cs, i);
    auto it = cs.pins.find(r);
    if (it != cs.pins.end() && !cs.inactive[r]) sys.offset(i) = it->second;
  }
  sys.A = reduce_matrix(A, cs, sys.full_to_reduced);
  const Vector Ag = A * sys.offset;
  sys.b = Vector::Zero(m);
  for (int i = 0; i < cs.n; ++i)
    if (sys.full_to_reduced[i] >= 0) sys.b(sys.full_to_reduced[i]) += b(i) - Ag(i);
  for (const Vector& w : cs.zero_mean_weights) {
    Vector c = Vector::Zero(m);
    double fixed = 0.0;
    for (int i = 0; i < cs.n; ++i) {
      if (sys.full_to_reduced[i] >= 0) c(sys.full_to_reduced[i]) += w(i);
      else fixed += w(i) * sys.offset(i);
    }
    if (std::abs(fixed) > 1e-14 * std::max(1.0, w.cwiseAbs().sum()))
      throw SolverError("zero-mean condition inconsistent with pinned values");
    sys.means.push_back(c);
  }
  return sys;
}

Eigen::MatrixXd bordered(const ReducedSystem& sys) {
  const int m = sys.A.rows;
  const int k = static_cast<int>(sys.means.size());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m + k, m + k);
  B.topLeftCorner(m, m) = sys.A.to_dense();
  for (int j = 0; j < k; ++j) {
    B.block(0, m + j, m, 1) = sys.means[j];
    B.block(m + j, 0, 1, m) = sys.means[j].transpose();
  }
  return B;
}

}  // namespace thermohom
