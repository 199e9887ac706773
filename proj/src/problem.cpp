#include "thermohom/problem.hpp"

#include <algorithm>
#include <cmath>

namespace thermohom {

double InitialTemperature::operator()(const Vec& x) const {
  if (profile == Profile::Constant) return mean;
  double p = 1.0;
  for (int i = 0; i < x.size(); ++i) p *= std::cos(M_PI * x(i));
  return mean + amplitude * p;
}

const char* InitialTemperature::profile_name(Profile p) { return p == Profile::Constant ? "constant" : "cosine"; }

InitialTemperature::Profile InitialTemperature::parse_profile(const std::string& s) {
  if (s == "constant") return Profile::Constant;
  if (s == "cosine") return Profile::Cosine;
  throw Error("unknown initial profile '" + s + "' (expected constant or cosine)");
}

void ModelSetup::validate() const {
  check_dim(dim);
  auto bad = [](const std::string& field, const std::string& why) { throw Error("invalid " + field + ": " + why); };
  if (transformation.dim != dim) bad("transformation.dim", "does not match dimension");
  if (material.dim != dim) bad("material.dim", "does not match dimension");
  if (!(radius > 0.0) || !(radius < 0.5)) bad("radius", "must lie in (0, 0.5)");
  if (!(radius + transformation.boundary_margin < 0.5)) bad("radius", "radius + boundary margin must stay below 0.5");
  if (cell_n < 4 || cell_n % 2) bad("cell_n", "must be an even integer >= 4");
  if (macro_n < 4 || macro_n % 2) bad("macro_n", "must be an even integer >= 4");
  if (!(T >= 0.0)) bad("T", "must be >= 0");
  if (!(dt > 0.0)) bad("dt", "must be > 0");
  if (T > 0.0 && dt > T) bad("dt", "must not exceed T");
  if (!(cg_tol > 0.0)) bad("cg_tol", "must be > 0");
  if (!(fixed_point_tol > 0.0)) bad("fixed_point_tol", "must be > 0");
  if (fixed_point_max_iter < 1) bad("fixed_point_max_iter", "must be >= 1");
  if (latent_sign != 1.0 && latent_sign != -1.0) bad("latent_sign", "must be +1 or -1");
  if (cache_t_quantum < 0.0) bad("cache_t_quantum", "must be >= 0");
  if (cache_x_quantum < 0.0) bad("cache_x_quantum", "must be >= 0");
  if (static_cast<int>(sources.f_u[0].size()) != dim || static_cast<int>(sources.f_u[1].size()) != dim)
    bad("sources", "force vectors must have the model dimension");
  transformation.validate();
  material.validate();
}

int ModelSetup::steps() const {
  if (T <= 0.0) return 0;
  return static_cast<int>(std::ceil(T / dt - 1e-9));
}

double ModelSetup::time(int step) const { return std::min(step * dt, T); }

SolverOptions ModelSetup::solver() const {
  SolverOptions o;
  o.tol = cg_tol;
  return o;
}

double ModelSetup::t_quantum() const { return cache_t_quantum > 0.0 ? cache_t_quantum : dt; }
double ModelSetup::x_quantum() const { return cache_x_quantum > 0.0 ? cache_x_quantum : 1.0 / macro_n; }

Mesh build_box_mesh(int n, int d) {
  CellMesh m = build_cell_mesh(0.0, n, d);
  Mesh out;
  out.dim = m.dim;
  out.vertices = std::move(m.vertices);
  out.cells = std::move(m.cells);
  out.phase = std::move(m.phase);
  out.boundary = std::move(m.boundary);
  return out;
}

std::vector<char> boundary_vertices(const Mesh& mesh) {
  std::vector<char> mask(mesh.vertices.size(), 0);
  for (const auto& f : mesh.boundary)
    for (int i = 0; i < mesh.dim; ++i) mask[f.v[i]] = 1;
  return mask;
}

PointLocator::PointLocator(const Mesh& mesh, int nb)
    : mesh_(&mesh), space_(std::make_unique<P1Space>(mesh)), nb_(std::max(1, nb)) {
  const int d = mesh.dim;
  lo_ = mesh.vertices.front();
  hi_ = mesh.vertices.front();
  for (const Vec& v : mesh.vertices) {
    lo_ = lo_.cwiseMin(v);
    hi_ = hi_.cwiseMax(v);
  }
  const std::size_t total = d == 2 ? nb_ * nb_ : nb_ * nb_ * nb_;
  buckets_.resize(total);
  auto cell_index = [&](double x, int k) {
    const double s = (x - lo_(k)) / (hi_(k) - lo_(k));
    return std::clamp(static_cast<int>(std::floor(s * nb_)), 0, nb_ - 1);
  };
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    std::array<int, 3> a{0, 0, 0}, b{0, 0, 0};
    for (int k = 0; k < d; ++k) {
      double mn = 1e300, mx = -1e300;
      for (int v = 0; v <= d; ++v) {
        mn = std::min(mn, mesh.vertices[mesh.cells[c][v]](k));
        mx = std::max(mx, mesh.vertices[mesh.cells[c][v]](k));
      }
      const double pad = 1e-9 * (hi_(k) - lo_(k));
      a[k] = cell_index(mn - pad, k);
      b[k] = cell_index(mx + pad, k);
    }
    for (int i = a[0]; i <= b[0]; ++i)
      for (int j = a[1]; j <= b[1]; ++j)
        for (int l = a[2]; l <= b[2]; ++l) buckets_[i + nb_ * (j + nb_ * l)].push_back(static_cast<int>(c));
  }
}

int PointLocator::locate(const Vec& x) const {
  const int d = mesh_->dim;
  std::array<int, 3> idx{0, 0, 0};
  for (int k = 0; k < d; ++k) {
    const double s = (x(k) - lo_(k)) / (hi_(k) - lo_(k));
    idx[k] = std::clamp(static_cast<int>(std::floor(s * nb_)), 0, nb_ - 1);
  }
  int best = -1;
  double best_min = -1e300;
  for (int c : buckets_[idx[0] + nb_ * (idx[1] + nb_ * idx[2])]) {
    const auto b = space_->barycentric(c, x);
    double mn = 1e300;
    for (int a = 0; a <= d; ++a) mn = std::min(mn, b[a]);
    if (mn > best_min) {
      best_min = mn;
      best = c;
    }
  }
  return best_min >= -1e-10 ? best : -1;
}

double PointLocator::interpolate(const Vector& nodal, const Vec& x) const {
  const int c = locate(x);
  if (c < 0) throw Error("point outside the mesh");
  const auto b = space_->barycentric(c, x);
  double s = 0.0;
  for (int a = 0; a <= mesh_->dim; ++a) s += b[a] * nodal(mesh_->cells[c][a]);
  return s;
}

}  // namespace thermohom
