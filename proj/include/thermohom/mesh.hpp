#pragma once

#include "thermohom/tensor.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace thermohom {

class MeshError : public Error {
public:
  using Error::Error;
};

using Simplex = std::array<int, 4>;  // first d+1 entries used
using Face = std::array<int, 3>;     // first d entries used

struct InterfaceFacet {
  Face v{};
  int cell_b = -1;
  int cell_a = -1;
  Vec normal;  // n0, unit, from B into A
  double measure = 0.0;
};

struct BoundaryFacet {
  Face v{};
  int cell = -1;
  Vec normal;  // outward
  double measure = 0.0;
};

struct Mesh {
  int dim = 2;
  std::vector<Vec> vertices;
  std::vector<Simplex> cells;
  std::vector<Phase> phase;
  std::vector<InterfaceFacet> interface;
  std::vector<BoundaryFacet> boundary;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t cell_count() const { return cells.size(); }
  int nodes_per_cell() const { return dim + 1; }

  double cell_volume(std::size_t c) const;  // signed
  Vec cell_centroid(std::size_t c) const;
  double phase_measure(Phase p) const;
  double total_measure() const;
  double interface_measure() const;

  // Vertices touched by cells of the given phase.
  std::vector<char> phase_vertex_mask(Phase p) const;
};

struct CellMesh : Mesh {
  double radius = 0.0;
  int n = 0;
  // Follower vertex -> leader vertex on the opposite faces (self for leaders).
  std::vector<int> periodic_leader;

  std::vector<std::pair<int, int>> periodic_pairs() const;
};

// Builds the interface-fitted cell mesh: the inner L-infinity square of half
// width round(r n)/n is mapped onto the disk/ball of radius r, the shells up
// to n/2 - ceil(n/16) are blended back to squares, and the rest stays a
// regular grid. Cubes are split with a reflected Kuhn pattern (diagonals
// toward the center). r = 0 gives the unperforated cell.
CellMesh build_cell_mesh(double r, int n, int d);

struct EpsilonMesh : Mesh {
  double eps = 1.0;
  int tiles = 1;  // per axis
  std::vector<int> vertex_tile;
  std::vector<int> vertex_cell_vertex;
  std::vector<int> cell_tile;
  std::vector<int> cell_cell;  // index of the cell in the cell mesh
  std::vector<int> facet_tile;
  std::vector<int> facet_cell_facet;

  Vec tile_origin(int tile) const;  // eps * multi-index
  // Number of connected components of the B phase (cells joined through shared vertices).
  int inclusion_components() const;
  // Vertices on the outer boundary of the unit domain.
  std::vector<char> outer_boundary_mask() const;
};

EpsilonMesh build_epsilon_mesh(const CellMesh& cell, double eps);

struct MeshQuality {
  double min_aspect = 0.0;
  double max_aspect = 0.0;
  double min_volume = 0.0;
  bool orientation_consistent = true;
  std::vector<int> degenerate;  // cells with volume <= tol
};

// Aspect ratio L_max / (2 sqrt(d(d+1)/2) r_in): 1 for the regular simplex.
double simplex_aspect_ratio(const Mesh& mesh, std::size_t c);
MeshQuality mesh_quality(const Mesh& mesh, double volume_tol = 1e-14);

// Recomputes interface and boundary facets from cell phases and adjacency.
void rebuild_facets(Mesh& mesh);
std::vector<int> compute_periodic_leaders(const Mesh& mesh, double tol = 1e-12);

// Plain-text mesh format:
//   thermohom-mesh <d> <#vertices> <#cells> <#interface facets>
//   vertex lines: coordinates
//   cell lines: d+1 indices, phase (A|B)
//   facet lines: d indices, orientation flag (+1 if the vertex-order normal points from B into A)
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
CellMesh read_cell_mesh(std::istream& in);

struct VtkField {
  std::string name;
  int components = 1;
  std::vector<double> values;  // per vertex (or per cell), component-major per entry
  bool cell_data = false;
};

void write_vtk(std::ostream& out, const Mesh& mesh, const std::vector<VtkField>& fields = {});
void write_vtk_file(const std::string& path, const Mesh& mesh, const std::vector<VtkField>& fields = {});

}  // namespace thermohom
