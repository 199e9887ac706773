#pragma once

#include "thermohom/twoscale.hpp"

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace thermohom {

struct EpsilonSolution {
  double eps = 1.0;
  ModelSetup setup;
  std::shared_ptr<const EpsilonMesh> mesh;
  std::vector<double> times;
  std::vector<Vector> theta;
  std::vector<Vector> u;  // vertex * d + i
  std::vector<int> iterations;
};

// Assembled epsilon-scaled operators at one time.
struct EpsilonOperators {
  double t = 0.0;
  CsrMatrix M;      // int c_ref theta psi
  CsrMatrix K;      // int K_ref grad theta . grad psi (eps^2 K_B)
  CsrMatrix Adv;    // int c_ref (v . grad psi) theta
  CsrMatrix Dg;     // int (gamma_ref : grad u) psi
  CsrMatrix DgAdv;  // int (gamma_ref : grad u) (v . grad psi)
  CsrMatrix E;      // int C_ref e(u) : e(w) (eps^2 C_B)
  CsrMatrix G;      // int theta alpha_ref : grad w
  CsrMatrix Ggamma; // int theta gamma_ref : grad w
  Vector F_theta;   // body heat source
  Vector latent;    // int_Gamma eps W_ref psi (times L when configured)
  Vector F_u;       // body force plus the curvature load
};

class EpsilonProblem {
public:
  EpsilonProblem(ModelSetup setup, double eps, std::shared_ptr<const CellContext> cell = nullptr);

  const ModelSetup& setup() const { return setup_; }
  double eps() const { return eps_; }
  const EpsilonMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const EpsilonMesh> mesh_ptr() const { return mesh_; }
  const P1Space& space() const { return *space_; }
  const CellContext& cell() const { return *cell_; }

  EpsilonOperators operators(double t) const;
  // Homogeneous Dirichlet condition for the displacement on the outer boundary.
  ConstraintSet mechanics_constraints() const;
  Vector initial_temperature() const;

  EpsilonSolution solve(const std::function<void(int step, double t, const Vector& theta, const Vector& u)>& observer =
                            {}) const;

private:
  std::vector<std::shared_ptr<const CellField>> fields_at(double t) const;
  Vector solve_mechanics(const EpsilonOperators& op, const Vector& theta, const Vector* warm) const;

  ModelSetup setup_;
  double eps_;
  MaterialParams scaled_;
  std::shared_ptr<const CellContext> cell_;
  std::shared_ptr<const EpsilonMesh> mesh_;
  std::unique_ptr<P1Space> space_;
  P1Space::Mask mask_A_;
  P1Space::Mask mask_B_;
};

EpsilonSolution solve_epsilon_problem(double eps, const ModelSetup& setup);

struct NormBundle {
  double theta_Linf_L2 = 0.0;      // max_t |Theta|_{L2(Omega)}
  double grad_theta_A = 0.0;       // |grad Theta|_{L2(S x Omega_A)}
  double grad_theta_B = 0.0;       // eps |grad Theta|_{L2(S x Omega_B)}
  double u_Linf_L2 = 0.0;          // max_t |U|_{L2(Omega)}
  double grad_u_A = 0.0;           // max_t |grad U|_{L2(Omega_A)}
  double grad_u_B = 0.0;           // eps max_t |grad U|_{L2(Omega_B)}

  std::array<double, 6> values() const;
  static std::array<const char*, 6> names();
};

// Time integrals use the right-endpoint rule of the implicit Euler steps.
NormBundle norm_bundle(const Mesh& mesh, double eps, const std::vector<double>& times,
                       const std::vector<Vector>& theta, const std::vector<Vector>& u);
NormBundle apriori_norm_bundle(const EpsilonSolution& sol);

// int_Gamma theta^2, exact for P1 fields on the interface facets.
double interface_l2_squared(const Mesh& mesh, const Vector& theta);

// max_t eps |Theta|^2_{L2(Gamma)} / (|Theta|^2_{L2} + eps^2 |grad Theta|^2_{L2}).
double trace_ratio(const EpsilonSolution& sol);

struct CheckLine {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = true;
  std::string note;
};

struct CheckReport {
  std::vector<CheckLine> lines;
  bool all_pass() const;
  void add(std::string name, double value, double threshold, bool pass, std::string note = {});
};

void write_report(std::ostream& out, const CheckReport& report);

struct StructureOptions {
  int probes = 100;
  int symmetry_pairs = 10;
  unsigned seed = 20240601u;
  double symmetry_tol = 1e-8;
  double solve_tol = 1e-12;
};

// E symmetric positive definite on the constrained space, the heat operator
// coercive, B2 = G_gamma^T E^{-1} G_alpha symmetric and monotone, and the
// time-difference quotient of <B2 f, g> over the t samples.
CheckReport operator_structure_checks(double eps, const ModelSetup& setup, const std::vector<double>& t_samples,
                                      const StructureOptions& opt = {});

struct CompareRow {
  double eps = 0.0;
  double error_A = 0.0;         // |Theta^eps - theta_A|_{L2(S x Omega_A^eps)}
  double error_B = 0.0;         // against the micro reconstruction on Omega_B^eps
  double interpolation_A = 0.0; // |theta_0 - I theta_0|_{L2(Omega_A^eps)}, macro interpolation error
  double reference_A = 0.0;     // |Theta^eps|_{L2(S x Omega_A^eps)}
  int steps = 0;
};

struct CompareTable {
  std::vector<CompareRow> rows;
};

CompareTable two_scale_compare(const std::vector<double>& eps_list, const ModelSetup& setup);
std::vector<std::string> compare_csv_header();
void write_compare_csv(std::ostream& out, const CompareTable& table);

std::vector<std::string> norm_bundle_csv_header();
void write_norm_bundle_csv(std::ostream& out, const std::vector<std::pair<double, NormBundle>>& rows);

}  // namespace thermohom
