#pragma once

#include "thermohom/effective.hpp"

#include <memory>
#include <string>
#include <vector>

namespace thermohom {

// theta_0(x) = mean + amplitude prod_i cos(pi x_i); compatible with the
// homogeneous Neumann condition on the unit box.
struct InitialTemperature {
  enum class Profile { Constant, Cosine };
  Profile profile = Profile::Cosine;
  double mean = 1.0;
  double amplitude = 0.5;

  double operator()(const Vec& x) const;
  static const char* profile_name(Profile p);
  static Profile parse_profile(const std::string& s);
};

// Physical data and discretization shared by the homogenized and the
// epsilon-resolved solvers.
struct ModelSetup {
  int dim = 2;
  double radius = 0.25;
  int cell_n = 16;
  int macro_n = 16;
  Transformation transformation = Transformation::radial_growth(2, 0.1, 0.25);
  MaterialParams material = MaterialParams::defaults(2);
  Sources sources = Sources::zero(2);
  InitialTemperature theta0;
  double T = 0.5;
  double dt = 0.05;
  EffectiveOptions effective;
  double latent_sign = 1.0;  // +1: interface heat term on the left of the heat balance
  double cg_tol = 1e-10;
  double fixed_point_tol = 1e-8;
  int fixed_point_max_iter = 50;
  bool micro_per_element = false;
  double cache_t_quantum = 0.0;  // 0: dt
  double cache_x_quantum = 0.0;  // 0: macro element size

  void validate() const;
  int steps() const;
  double time(int step) const;  // t_k = min(k dt, T)
  SolverOptions solver() const;
  double t_quantum() const;
  double x_quantum() const;
};

// Unit square/cube with the regular split used for the cell grid.
Mesh build_box_mesh(int n, int d);

// Vertices on the outer boundary.
std::vector<char> boundary_vertices(const Mesh& mesh);

// Cell location by bucketing cell bounding boxes on a uniform grid.
class PointLocator {
public:
  PointLocator(const Mesh& mesh, int buckets_per_axis);
  // Returns the cell containing x (barycentric tolerance 1e-10) or -1.
  int locate(const Vec& x) const;
  double interpolate(const Vector& nodal, const Vec& x) const;

private:
  const Mesh* mesh_;
  std::unique_ptr<P1Space> space_;
  int nb_;
  Vec lo_, hi_;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace thermohom
