#pragma once

#include "thermohom/cell.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace thermohom {

// How the undefined corrector symbols of the c_eff / gamma_eff formulas are read.
//   Stated:  c_eff = rho_A c_dA |Y_A| + alpha_A int div tau^u,
//            gamma_eff_jk = int gamma_A^ref_jk + gamma_A int div tau_jk + gamma_B |Y_B| delta_jk.
//   Derived: c_eff = int c_A^ref + int gamma_A^ref : grad tau^u,
//            gamma_eff_jk = int gamma_A^ref_jk + int gamma_A^ref : grad tau_jk,
//            and the inclusion dissipation enters through the micro problems.
enum class Interpretation { Stated, Derived };

const char* interpretation_name(Interpretation i);
Interpretation parse_interpretation(const std::string& s);

struct EffectiveOptions {
  Interpretation interpretation = Interpretation::Stated;
  bool latent_heat_in_Weff = true;
};

struct EffectiveCoefficients {
  double t = 0.0;
  Vec x;
  int dim = 2;
  Tensor4 C_eff;
  Mat alpha_eff;
  Mat K_eff;
  double c_eff = 0.0;
  Mat gamma_eff;
  Vec H_eff;
  double W_eff = 0.0;
  Vec f_u_eff;
  double f_theta_eff = 0.0;
  double Y_A_measure = 0.0;  // deformed |Y_A(t,x)|
  double Y_B_measure = 0.0;
};

void compute_effective_mechanics(const CellContext& ctx, const CellSolution& sol, EffectiveCoefficients& out);
void compute_effective_heat(const CellContext& ctx, const CellSolution& sol, const MaterialParams& mat,
                            const EffectiveOptions& opt, EffectiveCoefficients& out);
EffectiveCoefficients compute_effective(const CellContext& ctx, const CellSolution& sol, const MaterialParams& mat,
                                        const EffectiveOptions& opt);

// Canonical basis followed by `count` seeded pseudo-random unit vectors.
std::vector<Vec> probe_vectors(int d, int count = 20, unsigned seed = 20240601u);

struct EffectiveCheck {
  bool ok = true;
  double C_minor_defect = 0.0;
  double C_major_defect = 0.0;
  double C_min_eig = 0.0;
  double K_asymmetry = 0.0;
  double K_min_eig = 0.0;
  double voigt_slack = 0.0;  // min over probes of bound - q^T K_eff q
  double c_eff = 0.0;
  std::vector<std::string> failures;
};

// Structural invariants. The Voigt bound uses int_{Y_A} q^T K_A^ref q, which is
// |Y_A| q^T K_A q for the identity transformation.
EffectiveCheck check_effective(const EffectiveCoefficients& eff, const CellContext& ctx, const CellField& field,
                               double tol = 1e-10);

struct EffectiveTable {
  int dim = 2;
  std::vector<EffectiveCoefficients> rows;
};

// Rows ordered time-major, then by point. Parallel over rows.
EffectiveTable tabulate_effective(CellCache& cache, const std::vector<double>& times, const std::vector<Vec>& points,
                                  const EffectiveOptions& opt);

std::vector<std::string> effective_csv_header(int d);
std::vector<double> effective_csv_row(const EffectiveCoefficients& e);
void write_effective_csv(std::ostream& out, const EffectiveTable& table);

}  // namespace thermohom
