#pragma once

#include "thermohom/fem.hpp"
#include "thermohom/kinematics.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace thermohom {

// Transformed coefficients at one quadrature point of the cell mesh.
struct QpCoefficients {
  Tensor4 C;
  Mat alpha;
  Mat gamma;
  Mat K;
  double c = 0.0;
  double J = 1.0;
  Vec v;
  Vec f_u;
  double f_theta = 0.0;
};

// Interface data at a facet centroid: W_ref and H_ref n0.
struct FacetCoefficients {
  double W = 0.0;
  Vec Hn;
};

// Every transformed coefficient of the cell mesh at a fixed (t, x).
struct CellField {
  double t = 0.0;
  Vec x;
  int nq = 0;
  std::vector<QpCoefficients> qp;  // cell * nq + q
  std::vector<FacetCoefficients> facet;
  double measure_A = 0.0;  // |Y_A(t,x)| = int_{Y_A} J
  double measure_B = 0.0;

  const QpCoefficients& at(std::size_t cell, int q) const { return qp[cell * nq + q]; }
};

// Cell mesh plus the derived masks and constraint layouts shared by every cell solve.
class CellContext {
public:
  explicit CellContext(CellMesh mesh);
  CellContext(const CellContext&) = delete;
  CellContext& operator=(const CellContext&) = delete;

  const CellMesh& mesh() const { return mesh_; }
  const P1Space& space() const { return space_; }
  int dim() const { return mesh_.dim; }
  const P1Space::Mask& cell_mask(Phase p) const { return cell_mask_[phase_index(p)]; }
  const std::vector<char>& vertex_mask(Phase p) const { return vertex_mask_[phase_index(p)]; }
  // Vertices shared by both phases.
  const std::vector<char>& interface_vertices() const { return interface_vertices_; }
  bool has_inclusion() const { return !mesh_.interface.empty(); }

  // Periodic zero-mean layout on Y_A with `components` unknowns per vertex.
  ConstraintSet periodic_constraints(int components) const;

  CellField sample(const Transformation& tr, const MaterialParams& mat, const Sources& src, double t,
                   const Vec& x) const;

private:
  CellMesh mesh_;
  P1Space space_;
  std::array<P1Space::Mask, 2> cell_mask_;
  std::array<std::vector<char>, 2> vertex_mask_;
  std::vector<char> interface_vertices_;
  Vector basis_A_;
};

struct Correctors {
  double t = 0.0;
  Vec x;
  std::vector<Vector> tau_u;  // one per symmetric pair, vector layout vertex * d + i
  Vector tau_u_theta;
  std::vector<Vector> tau_theta;  // one per direction
  double max_relative_residual = 0.0;
  int iterations = 0;
};

SolverOptions default_cell_solver();

// tau_u (pairs) and tau^u; returns them in `out`.
void solve_elastic_correctors(const CellContext& ctx, const CellField& field, Correctors& out,
                              const SolverOptions& opt = default_cell_solver());
void solve_thermal_correctors(const CellContext& ctx, const CellField& field, Correctors& out,
                              const SolverOptions& opt = default_cell_solver());
Correctors solve_correctors(const CellContext& ctx, const CellField& field,
                            const SolverOptions& opt = default_cell_solver());

// Weak residuals of the cell problems against a periodic test field, relative to
// the size of the load. pair = -1 selects the thermal-stress corrector.
double elastic_corrector_residual(const CellContext& ctx, const CellField& field, const Vector& tau, int pair,
                                  const Vector& test);
double thermal_corrector_residual(const CellContext& ctx, const CellField& field, const Vector& tau, int j,
                                  const Vector& test);

void write_correctors_vtk(const std::string& path, const CellContext& ctx, const Correctors& cor);

struct CellSolution {
  CellField field;
  Correctors correctors;
};

// Cell solutions keyed by quantized (t, x). Each entry is computed at the
// quantized representative, so concurrent writers produce identical values.
class CellCache {
public:
  CellCache(std::shared_ptr<const CellContext> ctx, Transformation tr, MaterialParams mat, Sources src,
            double t_quantum, double x_quantum, SolverOptions opt = default_cell_solver());

  std::shared_ptr<const CellSolution> get(double t, const Vec& x);

  const CellContext& context() const { return *ctx_; }
  std::shared_ptr<const CellContext> context_ptr() const { return ctx_; }
  const Transformation& transformation() const { return tr_; }
  const MaterialParams& material() const { return mat_; }
  const Sources& sources() const { return src_; }
  std::size_t size() const;
  std::size_t misses() const { return misses_; }

private:
  using Key = std::array<long long, 4>;
  Key key(double t, const Vec& x) const;

  std::shared_ptr<const CellContext> ctx_;
  Transformation tr_;
  MaterialParams mat_;
  Sources src_;
  double t_quantum_;
  double x_quantum_;
  SolverOptions opt_;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const CellSolution>> entries_;
  std::atomic<std::size_t> misses_{0};
};

}  // namespace thermohom
