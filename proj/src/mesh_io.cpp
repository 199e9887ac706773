#include "thermohom/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

namespace thermohom {

namespace {

Vec vertex_order_normal(const Mesh& m, const Face& f) {
  if (m.dim == 2) {
    const Vec t = m.vertices[f[1]] - m.vertices[f[0]];
    Vec n(2);
    n << t(1), -t(0);
    return n;
  }
  const Eigen::Vector3d a = m.vertices[f[1]] - m.vertices[f[0]];
  const Eigen::Vector3d b = m.vertices[f[2]] - m.vertices[f[0]];
  return Vec(a.cross(b));
}

}  // namespace

void write_mesh(std::ostream& out, const Mesh& mesh) {
  const int d = mesh.dim;
  out << "thermohom-mesh " << d << ' ' << mesh.vertices.size() << ' ' << mesh.cells.size() << ' '
      << mesh.interface.size() << "\n";
  out << std::setprecision(17);
  for (const Vec& x : mesh.vertices) {
    for (int i = 0; i < d; ++i) out << (i ? " " : "") << x(i);
    out << "\n";
  }
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    for (int i = 0; i <= d; ++i) out << mesh.cells[c][i] << ' ';
    out << phase_name(mesh.phase[c]) << "\n";
  }
  for (const auto& f : mesh.interface) {
    for (int i = 0; i < d; ++i) out << f.v[i] << ' ';
    out << (vertex_order_normal(mesh, f.v).dot(f.normal) > 0.0 ? 1 : -1) << "\n";
  }
}

Mesh read_mesh(std::istream& in) {
  std::string magic;
  Mesh mesh;
  std::size_t nv = 0, nc = 0, nf = 0;
  if (!(in >> magic >> mesh.dim >> nv >> nc >> nf) || magic != "thermohom-mesh")
    throw MeshError("mesh header must read 'thermohom-mesh <d> <#vertices> <#cells> <#interface facets>'");
  check_dim(mesh.dim);
  const int d = mesh.dim;
  mesh.vertices.resize(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    Vec x(d);
    for (int i = 0; i < d; ++i)
      if (!(in >> x(i))) throw MeshError("truncated vertex block at vertex " + std::to_string(v));
    mesh.vertices[v] = x;
  }
  for (std::size_t c = 0; c < nc; ++c) {
    Simplex s{-1, -1, -1, -1};
    for (int i = 0; i <= d; ++i)
      if (!(in >> s[i]) || s[i] < 0 || static_cast<std::size_t>(s[i]) >= nv)
        throw MeshError("bad vertex index in cell " + std::to_string(c));
    std::string ph;
    if (!(in >> ph) || (ph != "A" && ph != "B")) throw MeshError("cell " + std::to_string(c) + " needs phase A or B");
    mesh.cells.push_back(s);
    mesh.phase.push_back(ph == "A" ? Phase::A : Phase::B);
  }
  struct Listed {
    int flag;
    Face ordered;
  };
  std::map<Face, Listed> listed;
  for (std::size_t f = 0; f < nf; ++f) {
    Face face{-1, -1, -1};
    int flag = 0;
    for (int i = 0; i < d; ++i)
      if (!(in >> face[i]) || face[i] < 0 || static_cast<std::size_t>(face[i]) >= nv)
        throw MeshError("bad vertex index in facet " + std::to_string(f));
    if (!(in >> flag) || (flag != 1 && flag != -1)) throw MeshError("facet " + std::to_string(f) + " needs flag +1 or -1");
    Face key = face;
    std::sort(key.begin(), key.begin() + d);
    listed[key] = {flag, face};
  }
  rebuild_facets(mesh);
  if (listed.size() != mesh.interface.size())
    throw MeshError("listed interface facets do not match the phase boundary");
  for (const auto& fac : mesh.interface) {
    auto it = listed.find(fac.v);
    if (it == listed.end()) throw MeshError("phase-boundary facet missing from the facet list");
    const double s = vertex_order_normal(mesh, it->second.ordered).dot(fac.normal);
    if ((s > 0.0 ? 1 : -1) != it->second.flag) throw MeshError("facet orientation flag contradicts the B-to-A normal");
  }
  for (std::size_t c = 0; c < mesh.cells.size(); ++c)
    if (mesh.cell_volume(c) < 0.0) std::swap(mesh.cells[c][0], mesh.cells[c][1]);
  return mesh;
}

CellMesh read_cell_mesh(std::istream& in) {
  CellMesh cell;
  static_cast<Mesh&>(cell) = read_mesh(in);
  for (const Vec& x : cell.vertices)
    if (x.minCoeff() < -1e-12 || x.maxCoeff() > 1.0 + 1e-12) throw MeshError("cell mesh vertex outside [0,1]^d");
  cell.periodic_leader = compute_periodic_leaders(cell);
  if (!cell.interface.empty()) {
    const Vec c = Vec::Constant(cell.dim, 0.5);
    double sum = 0.0;
    int count = 0;
    for (const auto& f : cell.interface)
      for (int i = 0; i < cell.dim; ++i) {
        sum += (cell.vertices[f.v[i]] - c).norm();
        ++count;
      }
    cell.radius = sum / count;
  }
  return cell;
}

void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<VtkField>& fields) {
  const int d = mesh.dim;
  out << "# vtk DataFile Version 3.0\nthermohom\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(17);
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const Vec& x : mesh.vertices) out << x(0) << ' ' << x(1) << ' ' << (d == 3 ? x(2) : 0.0) << "\n";
  out << "CELLS " << mesh.cells.size() << ' ' << mesh.cells.size() * (d + 2) << "\n";
  for (const auto& s : mesh.cells) {
    out << d + 1;
    for (int i = 0; i <= d; ++i) out << ' ' << s[i];
    out << "\n";
  }
  out << "CELL_TYPES " << mesh.cells.size() << "\n";
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) out << (d == 2 ? 5 : 10) << "\n";

  auto emit = [&](const VtkField& f, std::size_t count) {
    if (f.values.size() != count * f.components) throw MeshError("VTK field '" + f.name + "' has wrong length");
    if (f.components == 1) {
      out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) out << v << "\n";
    } else {
      out << "VECTORS " << f.name << " double\n";
      for (std::size_t i = 0; i < count; ++i) {
        for (int k = 0; k < 3; ++k) out << (k ? " " : "") << (k < f.components ? f.values[i * f.components + k] : 0.0);
        out << "\n";
      }
    }
  };
  out << "CELL_DATA " << mesh.cells.size() << "\nSCALARS phase int 1\nLOOKUP_TABLE default\n";
  for (Phase p : mesh.phase) out << phase_index(p) << "\n";
  for (const auto& f : fields)
    if (f.cell_data) emit(f, mesh.cells.size());
  bool header = false;
  for (const auto& f : fields)
    if (!f.cell_data) {
      if (!header) out << "POINT_DATA " << mesh.vertices.size() << "\n";
      header = true;
      emit(f, mesh.vertices.size());
    }
}

void write_vtk_file(const std::string& path, const Mesh& mesh, const std::vector<VtkField>& fields) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write " + path);
  write_vtk(out, mesh, fields);
}

}  // namespace thermohom
