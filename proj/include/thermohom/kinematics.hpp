#pragma once

#include "thermohom/tensor.hpp"

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace thermohom {

class KinematicsError : public Error {
public:
  using Error::Error;
};

class TabulatedTransformation;

enum class Family { Identity, RadialGrowth, UserTabulated };

const char* family_name(Family f);
Family parse_family(const std::string& name);

// s(t,x,y) = y + g(t,x) eta(|y - y_c|) (y - y_c),
// g(t,x) = (rate t + quad t^2) (1 + x_slope sum_i (x_i - 1/2)).
// eta = 1 below `inner`, 0 above `outer`, quintic smoothstep in between.
struct RadialGrowthParams {
  double rate = 0.1;
  double quad = 0.0;
  double x_slope = 0.0;
  double inner = 0.3;
  double outer = 0.45;
};

struct Transformation {
  Family family = Family::Identity;
  int dim = 2;
  double c_s = 0.5;
  double C_s = 2.0;
  double boundary_margin = 0.1;  // c
  RadialGrowthParams radial;
  std::shared_ptr<const TabulatedTransformation> table;

  static Transformation identity(int d);
  // outer defaults to 0.5 - c/2; inner sits a third of the way from r to outer.
  static Transformation radial_growth(int d, double rate, double r, double margin = 0.1);

  Vec center() const { return Vec::Constant(dim, 0.5); }

  // Structural checks of the parameters (not the sampled admissibility).
  void validate() const;

  Vec map(double t, const Vec& x, const Vec& y) const;
  double amplitude(double t, const Vec& x) const;
  double amplitude_rate(double t, const Vec& x) const;
  // True when s does not depend on x (allows sharing cell solves across x).
  bool x_independent() const;
  bool is_static() const;
};

struct Cutoff {
  double eta, deta, d2eta;
};
Cutoff radial_cutoff(const RadialGrowthParams& p, double rho);

struct KinematicSample {
  Mat F;
  double J = 1.0;
  Vec v;
};

struct InterfaceSample {
  Vec n;
  double W = 0.0;
  double H = 0.0;
};

KinematicSample eval_kinematics(const Transformation& tr, double t, const Vec& x, const Vec& y);

// h is the finite-difference step for tabulated families (local facet size).
InterfaceSample eval_interface(const Transformation& tr, double t, const Vec& x, const Vec& y,
                               const Vec& n0, double h = 1e-3);

struct MaterialParams {
  int dim = 2;
  std::array<Tensor4, 2> C;
  std::array<Mat, 2> K;
  std::array<double, 2> alpha{1.0, 1.0};
  std::array<double, 2> gamma{1.0, 1.0};
  std::array<double, 2> rho{1.0, 1.0};
  std::array<double, 2> cd{1.0, 1.0};
  double sigma0 = 0.1;
  double L = 1.0;

  // Isotropic lambda = mu = 1, K = I in both phases.
  static MaterialParams defaults(int d);

  // C minor+major symmetric and positive definite, K SPD, rho/cd > 0;
  // alpha, gamma, sigma0 >= 0 so that decoupled runs are expressible.
  void validate() const;
};

// Per-phase body sources, constant in space on the current domain. Either
// constant in time or a piecewise-linear time table (clamped at both ends).
struct Sources {
  std::array<Vec, 2> f_u;
  std::array<double, 2> f_theta{0.0, 0.0};

  struct Row {
    double t = 0.0;
    std::array<Vec, 2> f_u;
    std::array<double, 2> f_theta{0.0, 0.0};
  };
  std::vector<Row> table;

  static Sources zero(int d);
  Sources at(double t) const;

  // Text format:
  //   thermohom-sources <d> <#rows>
  //   t f_u_A(d values) f_u_B(d values) f_theta_A f_theta_B   (strictly increasing t)
  static Sources read_table(std::istream& in);
  static Sources load_table(const std::string& path);
};

struct TransformedCoefficients {
  Tensor4 A_op;
  Tensor4 C_ref;
  Mat alpha_ref;
  Mat gamma_ref;
  double c_ref = 0.0;
  Mat K_ref;
  Vec v_ref;
  double W_ref = 0.0;
  Mat H_ref;
  Vec f_u_ref;
  double f_theta_ref = 0.0;
  double J = 1.0;
  bool on_interface = false;
};

// Pass n0 to also fill the interface entries W_ref and H_ref.
TransformedCoefficients transformed_coefficients(const Transformation& tr, const MaterialParams& mat,
                                                 Phase phase, double t, const Vec& x, const Vec& y,
                                                 const Sources* sources = nullptr,
                                                 const Vec* n0 = nullptr);

// Pullback formulas on an already evaluated kinematic sample.
TransformedCoefficients pull_back(const KinematicSample& k, const MaterialParams& mat, Phase phase,
                                  const Sources* sources = nullptr);

// Phase B: C eps^2, K eps^2, alpha eps, gamma eps. Phase A unchanged.
MaterialParams scaled_coefficients(const MaterialParams& mat, double eps);

struct AdmissibilityViolation {
  std::string what;
  double t;
  Vec x;
  Vec y;
  double value;
};

struct AdmissibilityReport {
  bool ok = true;
  double min_J = 0.0;
  double max_J = 0.0;
  double det_margin = 0.0;        // min(min_J - c_s, C_s - max_J)
  double boundary_fixed_defect = 0.0;
  double interface_clearance = 0.0;  // min dist(s(Gamma), dY) - c
  double max_F = 0.0;
  double max_Finv = 0.0;
  double max_v = 0.0;
  double max_W = 0.0;
  double max_H = 0.0;
  std::vector<AdmissibilityViolation> violations;
};

struct AdmissibilityOptions {
  int grid = 32;
  double T = 1.0;
  int time_samples = 11;
  double interface_radius = 0.25;
  int interface_samples = 64;
  std::size_t max_violations = 20;
};

AdmissibilityReport validate_admissibility(const Transformation& tr, const AdmissibilityOptions& opt);

}  // namespace thermohom
