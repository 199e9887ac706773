#include "thermohom/fem.hpp"
#include "thermohom/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace thermohom {

int quadrature_points(int d) { return d + 1; }

std::array<double, 4> quadrature_bary(int d, int q) {
  std::array<double, 4> b{0.0, 0.0, 0.0, 0.0};
  if (d == 2) {
    for (int i = 0; i < 3; ++i) b[i] = 1.0 / 6.0;
    b[q] = 2.0 / 3.0;
  } else {
    for (int i = 0; i < 4; ++i) b[i] = 0.1381966011250105;
    b[q] = 0.5854101966249685;
  }
  return b;
}

double quadrature_weight(int d) { return 1.0 / (d + 1); }

P1Space::P1Space(const Mesh& mesh)
    : mesh_(&mesh), nq_(quadrature_points(mesh.dim)), pattern_mutex_(std::make_shared<std::mutex>()) {
  const int d = mesh.dim;
  const std::size_t nc = mesh.cells.size();
  volume_.resize(nc);
  grads_.resize(nc * (d + 1) * d);
  for (std::size_t c = 0; c < nc; ++c) {
    const Simplex& s = mesh.cells[c];
    Mat E(d, d);
    for (int i = 0; i < d; ++i) E.col(i) = mesh.vertices[s[i + 1]] - mesh.vertices[s[0]];
    const double det = E.determinant();
    volume_[c] = std::abs(det) / (d == 2 ? 2.0 : 6.0);
    if (!(volume_[c] > 0.0)) throw MeshError("degenerate cell " + std::to_string(c));
    const Mat Einv = inverse(E);
    double* g = &grads_[c * (d + 1) * d];
    for (int k = 0; k < d; ++k) g[k] = 0.0;
    for (int a = 1; a <= d; ++a)
      for (int k = 0; k < d; ++k) {
        g[a * d + k] = Einv(a - 1, k);
        g[k] -= Einv(a - 1, k);
      }
  }
}

Vec P1Space::grad(std::size_t c, int a) const {
  const int d = dim();
  Vec g(d);
  const double* p = &grads_[(c * (d + 1) + a) * d];
  for (int k = 0; k < d; ++k) g(k) = p[k];
  return g;
}

Vec P1Space::qp_position(std::size_t c, int q) const {
  const int d = dim();
  const auto b = quadrature_bary(d, q);
  Vec x = zero_vec(d);
  for (int a = 0; a <= d; ++a) x += b[a] * mesh_->vertices[mesh_->cells[c][a]];
  return x;
}

std::array<double, 4> P1Space::barycentric(std::size_t c, const Vec& x) const {
  const int d = dim();
  std::array<double, 4> b{0.0, 0.0, 0.0, 0.0};
  const Vec r = x - mesh_->vertices[mesh_->cells[c][0]];
  double sum = 0.0;
  for (int a = 1; a <= d; ++a) {
    b[a] = grad(c, a).dot(r);
    sum += b[a];
  }
  b[0] = 1.0 - sum;
  return b;
}

Vec P1Space::grad_scalar(std::size_t c, const Vector& u) const {
  const int d = dim();
  Vec g = zero_vec(d);
  for (int a = 0; a <= d; ++a) g += u(mesh_->cells[c][a]) * grad(c, a);
  return g;
}

Mat P1Space::grad_vector(std::size_t c, const Vector& u) const {
  const int d = dim();
  Mat G = Mat::Zero(d, d);
  for (int a = 0; a <= d; ++a) {
    const Vec ga = grad(c, a);
    const int v = mesh_->cells[c][a];
    for (int i = 0; i < d; ++i) G.row(i) += u(v * d + i) * ga.transpose();
  }
  return G;
}

double P1Space::scalar_at_qp(std::size_t c, int q, const Vector& u) const {
  const int d = dim();
  const auto b = quadrature_bary(d, q);
  double s = 0.0;
  for (int a = 0; a <= d; ++a) s += b[a] * u(mesh_->cells[c][a]);
  return s;
}

Vec P1Space::vector_at_qp(std::size_t c, int q, const Vector& u) const {
  const int d = dim();
  const auto b = quadrature_bary(d, q);
  Vec s = zero_vec(d);
  for (int a = 0; a <= d; ++a)
    for (int i = 0; i < d; ++i) s(i) += b[a] * u(mesh_->cells[c][a] * d + i);
  return s;
}

const P1Space::Pattern& P1Space::pattern(int rc, int cc) const {
  std::lock_guard lock(*pattern_mutex_);
  auto& slot = patterns_[{rc, cc}];
  if (slot) return *slot;
  const int d = dim();
  const int nv = static_cast<int>(vertex_count());
  const int lr = (d + 1) * rc, lc = (d + 1) * cc;
  std::vector<Triplet> t;
  t.reserve(cell_count() * lr * lc);
  for (const Simplex& s : mesh_->cells)
    for (int a = 0; a <= d; ++a)
      for (int i = 0; i < rc; ++i)
        for (int b = 0; b <= d; ++b)
          for (int k = 0; k < cc; ++k) t.push_back({s[a] * rc + i, s[b] * cc + k, 0.0});
  auto p = std::make_shared<Pattern>();
  p->skeleton = CsrMatrix::from_triplets(nv * rc, nv * cc, std::move(t));
  p->block = lr * lc;
  p->scatter.resize(cell_count() * p->block);
  const CsrMatrix& S = p->skeleton;
  parallel_for(cell_count(), [&](std::size_t c) {
    const Simplex& s = mesh_->cells[c];
    int m = 0;
    for (int a = 0; a <= d; ++a)
      for (int i = 0; i < rc; ++i) {
        const int row = s[a] * rc + i;
        auto b0 = S.col_idx.begin() + S.row_ptr[row], e0 = S.col_idx.begin() + S.row_ptr[row + 1];
        for (int b = 0; b <= d; ++b)
          for (int k = 0; k < cc; ++k) {
            const int col = s[b] * cc + k;
            p->scatter[c * p->block + m++] = static_cast<int>(std::lower_bound(b0, e0, col) - S.col_idx.begin());
          }
      }
  });
  slot = std::move(p);
  return *slot;
}

CsrMatrix P1Space::scatter(const Pattern& p, const std::vector<double>& local) const {
  CsrMatrix m = p.skeleton;
  std::fill(m.values.begin(), m.values.end(), 0.0);
  for (std::size_t k = 0; k < local.size(); ++k) m.values[p.scatter[k]] += local[k];
  if (!m.all_finite()) throw SolverError("non-finite entries in assembled operator");
  return m;
}

namespace {

bool active(const P1Space::Mask& mask, std::size_t c) { return mask.empty() || mask[c]; }

}  // namespace

CsrMatrix P1Space::diffusion(const QpFn<Mat>& K, const Mask& mask) const {
  const int d = dim();
  const Pattern& p = pattern(1, 1);
  std::vector<double> local(cell_count() * p.block, 0.0);
  parallel_for(cell_count(), [&](std::size_t c) {
    if (!active(mask, c)) return;
    Mat Kbar = Mat::Zero(d, d);
    for (int q = 0; q < nq_; ++q) Kbar += K(c, q, qp_position(c, q));
    Kbar *= qp_weight(c);
    double* out = &local[c * p.block];
    for (int a = 0; a <= d; ++a) {
      const Vec ga = grad(c, a);
      for (int b = 0; b <= d; ++b) out[a * (d + 1) + b] = ga.dot(Kbar * grad(c, b));
    }
  });
  return scatter(p, local);
}

CsrMatrix P1Space::mass(const QpFn<double>& cfn, const Mask& mask) const {
  const int d = dim();
  const Pattern& p = pattern(1, 1);
  std::vector<double> local(cell_count() * p.block, 0.0);
  parallel_for(cell_count(), [&](std::size_t c) {
    if (!active(mask, c)) return;
    double* out = &local[c * p.block];
    for (int q = 0; q < nq_; ++q) {
      const auto bq = quadrature_bary(d, q);
      const double w = qp_weight(c) * cfn(c, q, qp_position(c, q));
      for (int a = 0; a <= d; ++a)
        for (int b = 0; b <= d; ++b) out[a * (d + 1) + b] += w * bq[a] * bq[b];
    }
  });
  return scatter(p, local);
}

CsrMatrix P1Space::advection(const QpFn<double>& cfn, const QpFn<Vec>& v, const Mask& mask) const {
  const int d = dim();
  const Pattern& p = pattern(1, 1);
  std::vector<double> local(cell_count() * p.block, 0.0);
  parallel_for(cell_count(), [&](std::size_t c) {
    if (!active(mask, c)) return;
    double* out = &local[c * p.block];
    for (int q = 0; q < nq_; ++q) {
      const Vec x = qp_position(c, q);
      const auto bq = quadrature_bary(d, q);
      const Vec cv = qp_weight(c) * cfn(c, q, x) * v(c, q, x);
      for (int a = 0; a <= d; ++a) {
        const double s = cv.dot(grad(c, a));
        for (int b = 0; b <= d; ++b) out[a * (d + 1) + b] += s * bq[b];
      }
    }
  });
  return scatter(p, local);
}

CsrMatrix P1Space::elasticity(const QpFn<Tensor4>& C, const Mask& mask) const {
  const int d = dim();
  const Pattern& p = pattern(d, d);
  std::vector<double> local(cell_count() * p.block, 0.0);
  const int lc = (d + 1) * d;
  parallel_for(cell_count(), [&](std::size_t c) {
    if (!active(mask, c)) return;
    Tensor4 Cbar = zero_tensor(d);
    for (int q = 0; q < nq_; ++q) Cbar += C(c, q, qp_position(c, q));
    Cbar *= qp_weight(c);
    double* out = &local[c * p.block];
    for (int a = 0; a <= d; ++a) {
      const Vec ga = grad(c, a);
      for (int b = 0; b <= d; ++b) {
        const Vec gb = grad(c, b);
        for (int i = 0; i < d; ++i)
          for (int k = 0; k < d; ++k) {
            double s = 0.0;
            for (int j = 0; j < d; ++j)
              for (int l = 0; l < d; ++l) s += Cbar(i * d + j, k * d + l) * ga(j) * gb(l);
            out[(a * d + i) * lc + b * d + k] = s;
          }
      }
    }
  });
  return scatter(p, local);
}

CsrMatrix P1Space::coupling(const QpFn<Mat>& alpha, const Mask& mask) const {
  const int d = dim();
  const Pattern& p = pattern(d, 1);
  std::vector<double> local(cell_count() * p.block, 0.0);
  parallel_for(cell_count(), [&](std::size_t c) {
    if (!active(mask, c)) return;
    double* out = &local[c * p.block];
    for (int q = 0; q < nq_; ++q) {
      const auto bq = quadrature_bary(d, q);
      const Mat al = qp_weight(c) * alpha(c, q, qp_position(c, q));
      for (int a = 0; a <= d; ++a) {
        const Vec s = al * grad(c, a);  // s_i = alpha_ij d_j phi_a
        for (int i = 0; i < d; ++i)
          for (int b = 0; b <= d; ++b) out[(a * d + i) * (d + 1) + b] += s(i) * bq[b];
      }
    }
  });
  return scatter(p, local);
}

CsrMatrix P1Space::coupling_advection(const QpFn<Mat>& gamma, const QpFn<Vec>& v, const Mask& mask) const {
  const int d = dim();
  const Pattern& p = pattern(1, d);
  std::vector<double> local(cell_count() * p.block, 0.0);
  const int lc = (d + 1) * d;
  parallel_for(cell_count(), [&](std::size_t c) {
    if (!active(mask, c)) return;
    double* out = &local[c * p.block];
    for (int q = 0; q < nq_; ++q) {
      const Vec x = qp_position(c, q);
      const Mat g = gamma(c, q, x);
      const Vec vv = v(c, q, x);
      for (int a = 0; a <= d; ++a) {
        const double s = qp_weight(c) * vv.dot(grad(c, a));
        for (int b = 0; b <= d; ++b) {
          const Vec gb = g * grad(c, b);
          for (int k = 0; k < d; ++k) out[a * lc + b * d + k] += s * gb(k);
        }
      }
    }
  });
  return scatter(p, local);
}

Vector P1Space::load_scalar(const QpFn<double>& f, const Mask& mask) const {
  const int d = dim();
  std::vector<double> local(cell_count() * (d + 1), 0.0);
  parallel_for(cell_count(), [&](std::size_t c) {
    if (!active(mask, c)) return;
    for (int q = 0; q < nq_; ++q) {
      const auto bq = quadrature_bary(d, q);
      const double w = qp_weight(c) * f(c, q, qp_position(c, q));
      for (int a = 0; a <= d; ++a) local[c * (d + 1) + a] += w * bq[a];
    }
  });
  Vector out = Vector::Zero(vertex_count());
  for (std::size_t c = 0; c < cell_count(); ++c)
    for (int a = 0; a <= d; ++a) out(mesh_->cells[c][a]) += local[c * (d + 1) + a];
  return out;
}

Vector P1Space::load_vector(const QpFn<Vec>& f, const Mask& mask) const {
  const int d = dim();
  const int lb = (d + 1) * d;
  std::vector<double> local(cell_count() * lb, 0.0);
  parallel_for(cell_count(), [&](std::size_t c) {
    if (!active(mask, c)) return;
    for (int q = 0; q < nq_; ++q) {
      const auto bq = quadrature_bary(d, q);
      const Vec w = qp_weight(c) * f(c, q, qp_position(c, q));
      for (int a = 0; a <= d; ++a)
        for (int i = 0; i < d; ++i) local[c * lb + a * d + i] += w(i) * bq[a];
    }
  });
  Vector out = Vector::Zero(vertex_count() * d);
  for (std::size_t c = 0; c < cell_count(); ++c)
    for (int a = 0; a <= d; ++a)
      for (int i = 0; i < d; ++i) out(mesh_->cells[c][a] * d + i) += local[c * lb + a * d + i];
  return out;
}

Vector P1Space::load_divergence(const QpFn<Mat>& g, const Mask& mask) const {
  const int d = dim();
  const int lb = (d + 1) * d;
  std::vector<double> local(cell_count() * lb, 0.0);
  parallel_for(cell_count(), [&](std::size_t c) {
    if (!active(mask, c)) return;
    Mat gbar = Mat::Zero(d, d);
    for (int q = 0; q < nq_; ++q) gbar += g(c, q, qp_position(c, q));
    gbar *= qp_weight(c);
    for (int a = 0; a <= d; ++a) {
      const Vec s = gbar * grad(c, a);
      for (int i = 0; i < d; ++i) local[c * lb + a * d + i] = s(i);
    }
  });
  Vector out = Vector::Zero(vertex_count() * d);
  for (std::size_t c = 0; c < cell_count(); ++c)
    for (int a = 0; a <= d; ++a)
      for (int i = 0; i < d; ++i) out(mesh_->cells[c][a] * d + i) += local[c * lb + a * d + i];
  return out;
}

Vector P1Space::interface_load_scalar(const std::function<double(std::size_t, const Vec&, const Vec&)>& g) const {
  const int d = dim();
  if (mesh_->interface.empty()) throw MeshError("mesh has no interface facets");
  Vector out = Vector::Zero(vertex_count());
  for (std::size_t f = 0; f < mesh_->interface.size(); ++f) {
    const auto& fac = mesh_->interface[f];
    Vec x = zero_vec(d);
    for (int i = 0; i < d; ++i) x += mesh_->vertices[fac.v[i]];
    x /= d;
    const double w = g(f, x, fac.normal) * fac.measure / d;
    for (int i = 0; i < d; ++i) out(fac.v[i]) += w;
  }
  return out;
}

Vector P1Space::interface_load_vector(const std::function<Vec(std::size_t, const Vec&, const Vec&)>& g) const {
  const int d = dim();
  if (mesh_->interface.empty()) throw MeshError("mesh has no interface facets");
  Vector out = Vector::Zero(vertex_count() * d);
  for (std::size_t f = 0; f < mesh_->interface.size(); ++f) {
    const auto& fac = mesh_->interface[f];
    Vec x = zero_vec(d);
    for (int i = 0; i < d; ++i) x += mesh_->vertices[fac.v[i]];
    x /= d;
    const Vec w = g(f, x, fac.normal) * (fac.measure / d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) out(fac.v[i] * d + k) += w(k);
  }
  return out;
}

Vector P1Space::basis_integrals(const Mask& mask) const {
  return load_scalar([](std::size_t, int, const Vec&) { return 1.0; }, mask);
}

}  // namespace thermohom
