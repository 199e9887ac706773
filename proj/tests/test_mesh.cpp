#include "thermohom/mesh.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace thermohom;

TEST_SUITE("mesh") {

TEST_CASE("cell mesh measures and interface") {
  const double r = 0.25;
  for (int n : {8, 16, 32}) {
    const CellMesh m = build_cell_mesh(r, n, 2);
    CHECK(m.total_measure() == doctest::Approx(1.0).epsilon(1e-13));
    // Inscribed polygon: below the disk area, converging at second order.
    const double disk = std::numbers::pi * r * r;
    const double area_B = m.phase_measure(Phase::B);
    CHECK(area_B < disk);
    CHECK(area_B > disk * (1.0 - 40.0 / (n * n)));
    CHECK(m.interface_measure() < 2.0 * std::numbers::pi * r);
    CHECK(m.interface_measure() > 2.0 * std::numbers::pi * r * (1.0 - 20.0 / (n * n)));
    for (const auto& f : m.interface) {
      const Vec mid = 0.5 * (m.vertices[f.v[0]] + m.vertices[f.v[1]]);
      CHECK(f.normal.dot(mid - Vec::Constant(2, 0.5)) > 0.0);
      CHECK(m.phase[f.cell_b] == Phase::B);
      CHECK(m.phase[f.cell_a] == Phase::A);
    }
  }
}

TEST_CASE("interface vertices lie on the circle") {
  const CellMesh m = build_cell_mesh(0.25, 16, 2);
  for (const auto& f : m.interface)
    for (int a = 0; a < 2; ++a)
      CHECK((m.vertices[f.v[a]] - Vec::Constant(2, 0.5)).norm() == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("periodic leaders match opposite faces") {
  for (int d : {2, 3}) {
    const CellMesh m = build_cell_mesh(0.25, d == 2 ? 16 : 8, d);
    const auto pairs = m.periodic_pairs();
    CHECK_FALSE(pairs.empty());
    for (const auto& [follower, leader] : pairs) {
      const Vec diff = m.vertices[follower] - m.vertices[leader];
      for (int i = 0; i < d; ++i) CHECK(std::abs(diff(i) - std::round(diff(i))) < 1e-12);
      CHECK(m.periodic_leader[leader] == leader);
    }
  }
}

TEST_CASE("mesh quality of the cell mesh") {
  for (int d : {2, 3}) {
    const CellMesh m = build_cell_mesh(0.25, d == 2 ? 16 : 8, d);
    const MeshQuality q = mesh_quality(m);
    CHECK(q.degenerate.empty());
    CHECK(q.orientation_consistent);
    CHECK(q.min_volume > 0.0);
    CHECK(q.max_aspect < 10.0);
    CHECK(m.total_measure() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("unperforated cell") {
  const CellMesh m = build_cell_mesh(0.0, 8, 2);
  CHECK(m.interface.empty());
  CHECK(m.phase_measure(Phase::A) == doctest::Approx(1.0));
}

TEST_CASE("epsilon mesh tiles the unit square") {
  const CellMesh cell = build_cell_mesh(0.25, 8, 2);
  for (double eps : {0.5, 0.25}) {
    const EpsilonMesh em = build_epsilon_mesh(cell, eps);
    const int k = static_cast<int>(std::lround(1.0 / eps));
    CHECK(em.tiles == k);
    CHECK(em.inclusion_components() == k * k);
    CHECK(em.total_measure() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(em.phase_measure(Phase::B) == doctest::Approx(cell.phase_measure(Phase::B)).epsilon(1e-12));
    CHECK(em.interface_measure() == doctest::Approx(cell.interface_measure() / eps).epsilon(1e-12));
    CHECK(mesh_quality(em).degenerate.empty());
    // Tile-local vertex positions map back to the cell vertex.
    for (std::size_t v = 0; v < em.vertices.size(); v += 7) {
      const Vec local = (em.vertices[v] - em.tile_origin(em.vertex_tile[v])) / eps;
      CHECK((local - cell.vertices[em.vertex_cell_vertex[v]]).norm() < 1e-12);
    }
  }
  CHECK_THROWS_AS(build_epsilon_mesh(cell, 0.3), Error);
}

TEST_CASE("mesh text round trip") {
  const CellMesh m = build_cell_mesh(0.25, 8, 2);
  std::stringstream io;
  write_mesh(io, m);
  const Mesh r = read_mesh(io);
  CHECK(r.vertices.size() == m.vertices.size());
  CHECK(r.cells.size() == m.cells.size());
  CHECK(r.interface.size() == m.interface.size());
  CHECK(r.phase_measure(Phase::B) == doctest::Approx(m.phase_measure(Phase::B)).epsilon(1e-15));
  std::istringstream bad("thermohom-mesh 2 3 1 0\n0 0\n1 0\n");
  CHECK_THROWS_AS(read_mesh(bad), MeshError);
}

TEST_CASE("coarse three-dimensional cell") {
  const CellMesh m = build_cell_mesh(0.25, 8, 3);
  const double ball = 4.0 / 3.0 * std::numbers::pi * std::pow(0.25, 3);
  CHECK(m.phase_measure(Phase::B) == doctest::Approx(ball).epsilon(0.1));
  CHECK_FALSE(m.interface.empty());
}

}
