#include "thermohom/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace thermohom {

namespace {

Face face_key(const Simplex& s, int d, int skip) {
  Face f{-1, -1, -1};
  int m = 0;
  for (int i = 0; i <= d; ++i)
    if (i != skip) f[m++] = s[i];
  std::sort(f.begin(), f.begin() + d);
  return f;
}

// Unit normal and measure of a (d-1)-face, oriented away from `opposite`.
std::pair<Vec, double> face_normal(const Mesh& m, const Face& f, const Vec& opposite) {
  const int d = m.dim;
  Vec n(d);
  double measure;
  if (d == 2) {
    const Vec t = m.vertices[f[1]] - m.vertices[f[0]];
    n << t(1), -t(0);
    measure = t.norm();
  } else {
    const Eigen::Vector3d a = m.vertices[f[1]] - m.vertices[f[0]];
    const Eigen::Vector3d b = m.vertices[f[2]] - m.vertices[f[0]];
    const Eigen::Vector3d c = a.cross(b);
    n = c;
    measure = 0.5 * c.norm();
  }
  n.normalize();
  Vec centroid = zero_vec(d);
  for (int i = 0; i < d; ++i) centroid += m.vertices[f[i]];
  centroid /= d;
  if (n.dot(centroid - opposite) < 0.0) n = -n;
  return {n, measure};
}

int factorial(int d) { return d == 2 ? 2 : 6; }

}  // namespace

double Mesh::cell_volume(std::size_t c) const {
  const Simplex& s = cells[c];
  Mat E(dim, dim);
  for (int i = 0; i < dim; ++i) E.col(i) = vertices[s[i + 1]] - vertices[s[0]];
  return E.determinant() / factorial(dim);
}

Vec Mesh::cell_centroid(std::size_t c) const {
  Vec x = zero_vec(dim);
  for (int i = 0; i <= dim; ++i) x += vertices[cells[c][i]];
  return x / (dim + 1);
}

double Mesh::phase_measure(Phase p) const {
  double total = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (phase[c] == p) total += cell_volume(c);
  return total;
}

double Mesh::total_measure() const {
  double total = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) total += cell_volume(c);
  return total;
}

double Mesh::interface_measure() const {
  double total = 0.0;
  for (const auto& f : interface) total += f.measure;
  return total;
}

std::vector<char> Mesh::phase_vertex_mask(Phase p) const {
  std::vector<char> mask(vertices.size(), 0);
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (phase[c] == p)
      for (int i = 0; i <= dim; ++i) mask[cells[c][i]] = 1;
  return mask;
}

std::vector<std::pair<int, int>> CellMesh::periodic_pairs() const {
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t v = 0; v < periodic_leader.size(); ++v)
    if (periodic_leader[v] != static_cast<int>(v)) pairs.emplace_back(static_cast<int>(v), periodic_leader[v]);
  return pairs;
}

void rebuild_facets(Mesh& mesh) {
  const int d = mesh.dim;
  mesh.interface.clear();
  mesh.boundary.clear();
  struct Seen {
    int cell;
    int local;
    int count;
  };
  std::map<Face, Seen> faces;
  std::vector<Face> order;
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    for (int k = 0; k <= d; ++k) {
      const Face f = face_key(mesh.cells[c], d, k);
      auto [it, fresh] = faces.try_emplace(f, Seen{static_cast<int>(c), k, 0});
      if (fresh) order.push_back(f);
      ++it->second.count;
      if (it->second.count > 2) throw MeshError("non-manifold face shared by more than two cells");
      if (!fresh) {
        const int c0 = it->second.cell;
        const int c1 = static_cast<int>(c);
        if (mesh.phase[c0] != mesh.phase[c1]) {
          InterfaceFacet fac;
          fac.v = f;
          fac.cell_b = mesh.phase[c0] == Phase::B ? c0 : c1;
          fac.cell_a = mesh.phase[c0] == Phase::B ? c1 : c0;
          const Simplex& sb = mesh.cells[fac.cell_b];
          int opp = -1;
          for (int i = 0; i <= d; ++i)
            if (std::find(f.begin(), f.begin() + d, sb[i]) == f.begin() + d) opp = sb[i];
          auto [n, meas] = face_normal(mesh, f, mesh.vertices[opp]);
          fac.normal = n;
          fac.measure = meas;
          mesh.interface.push_back(fac);
        }
      }
    }
  for (const Face& f : order) {
    const Seen& s = faces.at(f);
    if (s.count != 1) continue;
    BoundaryFacet b;
    b.v = f;
    b.cell = s.cell;
    auto [n, meas] = face_normal(mesh, f, mesh.vertices[mesh.cells[s.cell][s.local]]);
    b.normal = n;
    b.measure = meas;
    mesh.boundary.push_back(b);
  }
}

CellMesh build_cell_mesh(double r, int n, int d) {
  check_dim(d);
  if (n < 4 || n % 2 != 0) throw MeshError("cell resolution must be an even integer >= 4");
  if (!(r >= 0.0) || !(r < 0.5)) throw MeshError("inclusion radius must lie in [0, 0.5)");
  const int half = n / 2;
  const int kB = static_cast<int>(std::lround(r * n));
  const int kT = half - (n + 15) / 16;
  if (r > 0.0 && (kB < 1 || kB >= kT || r >= static_cast<double>(kT) / n))
    throw MeshError("cell resolution too coarse to separate the interface from the cell boundary");

  CellMesh mesh;
  mesh.dim = d;
  mesh.radius = r;
  mesh.n = n;
  const int np = n + 1;
  const int nverts = d == 2 ? np * np : np * np * np;
  const double sB = static_cast<double>(kB) / n;
  const double sT = static_cast<double>(kT) / n;

  auto index = [&](const std::array<int, 3>& i) { return d == 2 ? i[0] + np * i[1] : i[0] + np * (i[1] + np * i[2]); };

  mesh.vertices.resize(nverts);
  mesh.periodic_leader.resize(nverts);
  for (int flat = 0; flat < nverts; ++flat) {
    std::array<int, 3> i{flat % np, (flat / np) % np, d == 3 ? flat / (np * np) : 0};
    Vec u(d);
    int sint = 0;
    for (int k = 0; k < d; ++k) {
      u(k) = static_cast<double>(i[k] - half) / n;
      sint = std::max(sint, std::abs(i[k] - half));
    }
    const Vec c = Vec::Constant(d, 0.5);
    Vec p;
    if (r == 0.0 || sint >= kT) {
      p = c;
      for (int k = 0; k < d; ++k) p(k) = static_cast<double>(i[k]) / n;
    } else if (sint == 0) {
      p = c;
    } else {
      const double s = static_cast<double>(sint) / n;
      const double len = u.norm();
      if (sint <= kB) {
        const double lam = s / sB;
        p = c + u * (r / sB) * ((1.0 - lam) + lam * s / len);
        if (sint == kB) p = c + u * (r / len);
      } else {
        const double lam = (s - sB) / (sT - sB);
        p = c + (1.0 - lam) * r * u / len + lam * sT * u / s;
      }
    }
    mesh.vertices[flat] = p;
    std::array<int, 3> lead = i;
    for (int k = 0; k < d; ++k)
      if (lead[k] == n) lead[k] = 0;
    mesh.periodic_leader[flat] = index(lead);
  }

  std::vector<std::array<int, 3>> perms =
      d == 2 ? std::vector<std::array<int, 3>>{{0, 1, 2}, {1, 0, 2}}
             : std::vector<std::array<int, 3>>{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  const int ncubes = d == 2 ? n * n : n * n * n;
  for (int flat = 0; flat < ncubes; ++flat) {
    std::array<int, 3> i{flat % n, (flat / n) % n, d == 3 ? flat / (n * n) : 0};
    bool inner = r > 0.0;
    for (int k = 0; k < d; ++k)
      if (i[k] - half < -kB || i[k] + 1 - half > kB) inner = false;
    const Phase ph = inner ? Phase::B : Phase::A;
    for (const auto& perm : perms) {
      Simplex s{-1, -1, -1, -1};
      std::array<int, 3> xi{0, 0, 0};
      for (int step = 0; step <= d; ++step) {
        if (step > 0) xi[perm[step - 1]] = 1;
        std::array<int, 3> g{0, 0, 0};
        for (int k = 0; k < d; ++k) {
          const bool flip = i[k] >= half;
          g[k] = i[k] + (flip ? 1 - xi[k] : xi[k]);
        }
        s[step] = index(g);
      }
      mesh.cells.push_back(s);
      mesh.phase.push_back(ph);
      if (mesh.cell_volume(mesh.cells.size() - 1) < 0.0) std::swap(mesh.cells.back()[0], mesh.cells.back()[1]);
    }
  }
  rebuild_facets(mesh);
  return mesh;
}

std::vector<int> compute_periodic_leaders(const Mesh& mesh, double tol) {
  const int d = mesh.dim;
  using Key = std::array<long long, 3>;
  std::map<Key, int> lookup;
  auto key = [&](const Vec& x) {
    Key k{0, 0, 0};
    for (int i = 0; i < d; ++i) k[i] = std::llround(x(i) / tol);
    return k;
  };
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) lookup.emplace(key(mesh.vertices[v]), static_cast<int>(v));
  std::vector<int> leader(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    Vec x = mesh.vertices[v];
    bool moved = false;
    for (int i = 0; i < d; ++i)
      if (std::abs(x(i) - 1.0) <= tol) {
        x(i) = 0.0;
        moved = true;
      }
    leader[v] = static_cast<int>(v);
    if (!moved) continue;
    const Key k = key(x);
    int found = -1;
    for (int m = 0; m < (d == 2 ? 9 : 27) && found < 0; ++m) {
      Key kk = k;
      int r = m;
      for (int i = 0; i < d; ++i) {
        kk[i] += r % 3 - 1;
        r /= 3;
      }
      auto it = lookup.find(kk);
      if (it != lookup.end() && (mesh.vertices[it->second] - x).cwiseAbs().maxCoeff() <= tol) found = it->second;
    }
    if (found < 0) throw MeshError("periodic partner missing for vertex " + std::to_string(v));
    leader[v] = found;
  }
  return leader;
}

Vec EpsilonMesh::tile_origin(int tile) const {
  Vec o(dim);
  for (int k = 0; k < dim; ++k) {
    o(k) = eps * (tile % tiles);
    tile /= tiles;
  }
  return o;
}

int EpsilonMesh::inclusion_components() const {
  std::vector<int> parent(vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  std::vector<char> used(vertices.size(), 0);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (phase[c] != Phase::B) continue;
    for (int i = 0; i <= dim; ++i) {
      used[cells[c][i]] = 1;
      parent[find(cells[c][i])] = find(cells[c][0]);
    }
  }
  int count = 0;
  for (std::size_t v = 0; v < vertices.size(); ++v)
    if (used[v] && find(static_cast<int>(v)) == static_cast<int>(v)) ++count;
  return count;
}

std::vector<char> EpsilonMesh::outer_boundary_mask() const {
  std::vector<char> mask(vertices.size(), 0);
  for (const auto& b : boundary)
    for (int i = 0; i < dim; ++i) mask[b.v[i]] = 1;
  return mask;
}

EpsilonMesh build_epsilon_mesh(const CellMesh& cell, double eps) {
  if (!(eps > 0.0)) throw MeshError("eps must be positive");
  const double inv = 1.0 / eps;
  const long m = std::lround(inv);
  if (m < 1 || std::abs(inv - static_cast<double>(m)) > 1e-9 * inv)
    throw MeshError("1/eps must be an integer");
  const int d = cell.dim;
  EpsilonMesh mesh;
  mesh.dim = d;
  mesh.eps = eps;
  mesh.tiles = static_cast<int>(m);
  const int ntiles = d == 2 ? static_cast<int>(m * m) : static_cast<int>(m * m * m);
  const double tol = eps * 1e-9;

  using Key = std::array<long long, 3>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::size_t h = 1469598103934665603ull;
      for (long long v : k) h = (h ^ static_cast<std::size_t>(v)) * 1099511628211ull;
      return h;
    }
  };
  std::unordered_map<Key, int, KeyHash> lookup;
  auto key = [&](const Vec& x) {
    Key k{0, 0, 0};
    for (int i = 0; i < d; ++i) k[i] = std::llround(x(i) / tol);
    return k;
  };

  const std::size_t ncv = cell.vertices.size();
  std::vector<int> local(ncv);
  for (int tile = 0; tile < ntiles; ++tile) {
    const Vec origin = mesh.tile_origin(tile);
    for (std::size_t v = 0; v < ncv; ++v) {
      const Vec x = origin + eps * cell.vertices[v];
      const Key k = key(x);
      int found = -1;
      for (int nb = 0; nb < (d == 2 ? 9 : 27) && found < 0; ++nb) {
        Key kk = k;
        int r = nb;
        for (int i = 0; i < d; ++i) {
          kk[i] += r % 3 - 1;
          r /= 3;
        }
        auto it = lookup.find(kk);
        if (it != lookup.end() && (mesh.vertices[it->second] - x).cwiseAbs().maxCoeff() <= tol) found = it->second;
      }
      if (found < 0) {
        found = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(x);
        mesh.vertex_tile.push_back(tile);
        mesh.vertex_cell_vertex.push_back(static_cast<int>(v));
        lookup.emplace(k, found);
      }
      local[v] = found;
    }
    for (std::size_t c = 0; c < cell.cells.size(); ++c) {
      Simplex s = cell.cells[c];
      for (int i = 0; i <= d; ++i) s[i] = local[s[i]];
      mesh.cells.push_back(s);
      mesh.phase.push_back(cell.phase[c]);
      mesh.cell_tile.push_back(tile);
      mesh.cell_cell.push_back(static_cast<int>(c));
    }
  }
  rebuild_facets(mesh);
  // Map each interface facet back to its tile and cell facet.
  std::map<std::pair<int, Face>, int> by_cell;
  for (std::size_t f = 0; f < cell.interface.size(); ++f) by_cell[{cell.interface[f].cell_b, cell.interface[f].v}] = static_cast<int>(f);
  for (const auto& fac : mesh.interface) {
    const int tile = mesh.cell_tile[fac.cell_b];
    const int cb = mesh.cell_cell[fac.cell_b];
    const Simplex& gs = mesh.cells[fac.cell_b];
    const Simplex& ls = cell.cells[cb];
    Face lf{-1, -1, -1};
    for (int i = 0; i < d; ++i) {
      const int pos = static_cast<int>(std::find(gs.begin(), gs.begin() + d + 1, fac.v[i]) - gs.begin());
      lf[i] = ls[pos];
    }
    std::sort(lf.begin(), lf.begin() + d);
    auto it = by_cell.find({cb, lf});
    if (it == by_cell.end()) throw MeshError("interface facet of the tiled mesh not found in the cell mesh");
    mesh.facet_tile.push_back(tile);
    mesh.facet_cell_facet.push_back(it->second);
  }
  return mesh;
}

double simplex_aspect_ratio(const Mesh& mesh, std::size_t c) {
  const int d = mesh.dim;
  const Simplex& s = mesh.cells[c];
  double lmax = 0.0;
  for (int i = 0; i <= d; ++i)
    for (int j = i + 1; j <= d; ++j) lmax = std::max(lmax, (mesh.vertices[s[i]] - mesh.vertices[s[j]]).norm());
  double area = 0.0;
  for (int k = 0; k <= d; ++k) {
    const Face f = face_key(s, d, k);
    area += face_normal(mesh, f, mesh.vertices[s[k]]).second;
  }
  const double vol = std::abs(mesh.cell_volume(c));
  if (vol <= 0.0) return std::numeric_limits<double>::infinity();
  const double r_in = d * vol / area;
  return lmax / (2.0 * std::sqrt(d * (d + 1) / 2.0) * r_in);
}

MeshQuality mesh_quality(const Mesh& mesh, double volume_tol) {
  MeshQuality q;
  q.min_aspect = std::numeric_limits<double>::infinity();
  q.min_volume = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    const double v = mesh.cell_volume(c);
    q.min_volume = std::min(q.min_volume, v);
    if (v < 0.0) q.orientation_consistent = false;
    if (std::abs(v) <= volume_tol) {
      q.degenerate.push_back(static_cast<int>(c));
      continue;
    }
    const double a = simplex_aspect_ratio(mesh, c);
    q.min_aspect = std::min(q.min_aspect, a);
    q.max_aspect = std::max(q.max_aspect, a);
  }
  return q;
}

}  // namespace thermohom
