#pragma once

#include "thermohom/problem.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace thermohom {

// Where a micro problem is hosted: a macro quadrature point, or the element
// centroid when micro problems are decimated to one per element.
struct MicroPoint {
  std::size_t cell = 0;
  int q = -1;  // -1: centroid
  Vec x;
  double weight = 0.0;  // macro quadrature weight
  std::array<double, 4> beta{};  // barycentric sampling / distribution weights
};

// Inclusion operators at one (t, x) in reference coordinates, on the cell mesh
// restricted to Y_B. Scalar rows/cols are cell-mesh vertices, vector ones vertex * d + i.
struct MicroOperators {
  std::shared_ptr<const CellSolution> cell;
  CsrMatrix M;       // int c_ref theta psi
  CsrMatrix K;       // int K_ref grad theta . grad psi
  CsrMatrix Adv;     // int c_ref (v_ref . grad psi) theta
  CsrMatrix Dg;      // int (gamma_ref : grad u) psi
  CsrMatrix DgAdv;   // int (gamma_ref : grad u) (v_ref . grad psi)
  CsrMatrix E;       // int C_ref e(u) : e(w)
  CsrMatrix G;       // int theta alpha_ref : grad w
  Vector F_theta;
  Vector F_u;
  Vector mass_weights;         // M^T 1
  Vector dissipation_weights;  // Dg^T 1
  Eigen::LLT<Eigen::MatrixXd> elastic;  // E on interior vector dofs
};

// Heat factorization for a given dt plus the unit-trace response.
struct MicroHeatFactor {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;  // (M/dt + Adv + K) on interior dofs
  Vector theta1;  // response to theta = 1 on the interface, zero history
  double q1 = 0.0;  // heat content of theta1
};

struct MicroState {
  Vector theta;        // per cell-mesh vertex, zero outside Y_B
  Vector u;            // vertex * d + i
  Vector mass_theta;   // M(t) theta
  Vector dissipation;  // Dg(t) u
  double heat_content = 0.0;         // int_{Y_B} c_ref theta
  double dissipation_average = 0.0;  // int_{Y_B} gamma_ref : grad u
};

struct MicroResult {
  MicroState state;
  double homogeneous_content = 0.0;  // content of the zero-trace part
  double unit_content = 0.0;         // content per unit trace value
};

struct TwoScaleState {
  double t = 0.0;
  int step = 0;
  Vector theta_A;
  Vector u_A;  // vertex * d + i
  std::vector<MicroState> micro;
  std::vector<EffectiveCoefficients> eff;  // per micro point
  Vector content;  // assembled macro heat content, sum = total heat
  int iterations = 0;
  double change = 0.0;
  double mechanics_residual = 0.0;
};

struct StepReport {
  int step = 0;
  double t = 0.0;
  int iterations = 0;
  double change = 0.0;
  double heat_content = 0.0;   // int (c_eff theta_A + int_{Y_B} c_ref theta_B)
  double total_content = 0.0;  // including the dissipation terms
  double heat_energy = 0.0;    // int c_eff theta_A^2
  double theta_A_L2 = 0.0;
  double u_A_L2 = 0.0;
  double theta_B_mean = 0.0;
  double trace_defect = 0.0;
  double mechanics_residual = 0.0;
};

struct SimulationResult {
  std::vector<StepReport> reports;  // entry 0 is the initial state
  std::vector<Vector> theta_history;
  std::vector<Vector> u_history;
  TwoScaleState final_state;
};

class TwoScaleSolver {
public:
  explicit TwoScaleSolver(ModelSetup setup, std::shared_ptr<const CellContext> cell = nullptr);

  const ModelSetup& setup() const { return setup_; }
  const Mesh& macro_mesh() const { return mesh_; }
  const P1Space& macro_space() const { return *space_; }
  const CellContext& cell() const { return cache_->context(); }
  CellCache& cell_cache() { return *cache_; }
  const std::vector<MicroPoint>& micro_points() const { return points_; }

  // theta_B0 may be empty (constant micro data); micro traces are overwritten.
  TwoScaleState init_state(const Vector& theta_A0, const std::vector<Vector>& theta_B0 = {});
  TwoScaleState initial_state();

  // One implicit Euler step of the inclusion problem at micro point mp.
  MicroResult micro_solve(std::size_t mp, double t_old, double t_new, double theta_A, const Vec& u_A,
                          const MicroState& previous);

  StepReport macro_step(TwoScaleState& state);
  SimulationResult run(const std::function<void(const TwoScaleState&, const StepReport&)>& observer = {});

  StepReport report(const TwoScaleState& state) const;
  double trace_defect(const TwoScaleState& state) const;
  double theta_at(const TwoScaleState& state, std::size_t mp) const;
  Vec u_at(const TwoScaleState& state, std::size_t mp) const;
  std::shared_ptr<const MicroOperators> micro_operators(double t, const Vec& x);

private:
  struct MicroSplit {
    Vector theta0;
    double q_hom = 0.0;
    std::shared_ptr<const MicroHeatFactor> factor;
    std::shared_ptr<const MicroOperators> ops;
  };

  std::vector<EffectiveCoefficients> effective_at(double t);
  const EffectiveCoefficients& eff_at(const std::vector<EffectiveCoefficients>& eff, std::size_t c, int q) const;
  std::shared_ptr<const MicroHeatFactor> heat_factor(const std::shared_ptr<const MicroOperators>& ops, double dt);
  MicroSplit micro_heat(std::size_t mp, double t_new, double dt, const MicroState& previous, const Vector& u_lag);
  MicroState micro_finish(const MicroSplit& split, double theta_A, const Vec& u_A);
  MicroState complete_micro(const MicroOperators& ops, Vector theta, const Vec& u_A) const;
  Vector solve_mechanics(const std::vector<EffectiveCoefficients>& eff, const Vector& theta_A, double* residual);
  Vector assemble_content(const TwoScaleState& s) const;
  double dissipation_at(const TwoScaleState& s, std::size_t mp) const;
  double l2(const Vector& scalar) const;
  double l2_vector(const Vector& v) const;

  ModelSetup setup_;
  Mesh mesh_;
  std::unique_ptr<P1Space> space_;
  std::unique_ptr<CellCache> cache_;
  std::vector<MicroPoint> points_;
  std::vector<char> boundary_;
  CsrMatrix mass1_;
  std::vector<int> interior_;  // cell-mesh vertices in Y_B off the interface
  std::vector<int> gamma_;     // interface vertices
  std::vector<int> interior_vec_;
  std::mutex ops_mutex_;
  std::map<const CellSolution*, std::shared_ptr<const MicroOperators>> ops_;
  std::map<std::pair<const MicroOperators*, long long>, std::shared_ptr<const MicroHeatFactor>> factors_;
};

std::vector<std::string> diagnostics_csv_header();
void write_diagnostics_csv(std::ostream& out, const std::vector<StepReport>& reports);

// Macro fields (theta_A, u_A) as legacy VTK.
void write_macro_vtk(const std::string& path, const TwoScaleSolver& solver, const TwoScaleState& state);

}  // namespace thermohom
