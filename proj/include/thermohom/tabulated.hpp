#pragma once

#include "thermohom/tensor.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace thermohom {

// Transformation given on a periodic y-grid at discrete times and macro points.
//
// File layout (whitespace separated, '#' starts a comment after the header):
//   # thermohom-transformation v1
//   dim <d>
//   times <t_0> ... <t_{m-1}>
//   points <p>
//   point <x_1> ... <x_d>                     (p lines)
//   grid <N>
//   <t> <x-index> <s values>                   (m * p rows)
// Each row lists s(t, x_k, y) for the N^d nodes y = i / N (row-major, last
// axis fastest), d components per node. Rows may come in any order.
//
// Between nodes the displacement s - y is interpolated by periodic
// tensor-product Catmull-Rom splines, linearly in time, and at the nearest
// macro point.
class TabulatedTransformation {
public:
  static TabulatedTransformation read(std::istream& in);
  static TabulatedTransformation load(const std::string& path);
  void write(std::ostream& out) const;

  TabulatedTransformation(int dim, std::vector<double> times, std::vector<Vec> points, int grid);

  int dim() const { return dim_; }
  int grid() const { return grid_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Vec>& points() const { return points_; }

  // Sets s at node (flat row-major index) for time slab it and point ip.
  void set_node(std::size_t it, std::size_t ip, std::size_t node, const Vec& s);
  Vec node_position(std::size_t node) const;
  std::size_t node_count() const;

  std::size_t nearest_point(const Vec& x) const;

  struct Eval {
    Vec s;
    Mat F;
    Vec v;
  };
  Eval evaluate(double t, const Vec& x, const Vec& y) const;

private:
  Vec displacement(std::size_t it, std::size_t ip, const Vec& y, Mat* grad) const;
  std::size_t slab(std::size_t it, std::size_t ip) const { return it * points_.size() + ip; }

  int dim_;
  std::vector<double> times_;
  std::vector<Vec> points_;
  int grid_;
  // displacement s - y per (slab, node, component)
  std::vector<double> disp_;
};

}  // namespace thermohom
