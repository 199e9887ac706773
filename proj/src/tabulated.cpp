#include "thermohom/tabulated.hpp"

#include "thermohom/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace thermohom {

namespace {

constexpr const char* kHeader = "# thermohom-transformation v1";

struct Weights {
  int idx[4];
  double w[4];
  double dw[4];
};

// Periodic Catmull-Rom weights for coordinate y in [0,1] on N nodes.
Weights catmull_rom(double y, int N) {
  double u = y * N;
  int i = static_cast<int>(std::floor(u));
  double f = u - i;
  if (i >= N) {
    i = N - 1;
    f = 1.0;
  }
  Weights W;
  for (int k = 0; k < 4; ++k) W.idx[k] = ((i - 1 + k) % N + N) % N;
  const double f2 = f * f, f3 = f2 * f;
  W.w[0] = 0.5 * (-f3 + 2.0 * f2 - f);
  W.w[1] = 0.5 * (3.0 * f3 - 5.0 * f2 + 2.0);
  W.w[2] = 0.5 * (-3.0 * f3 + 4.0 * f2 + f);
  W.w[3] = 0.5 * (f3 - f2);
  W.dw[0] = N * 0.5 * (-3.0 * f2 + 4.0 * f - 1.0);
  W.dw[1] = N * 0.5 * (9.0 * f2 - 10.0 * f);
  W.dw[2] = N * 0.5 * (-9.0 * f2 + 8.0 * f + 1.0);
  W.dw[3] = N * 0.5 * (3.0 * f2 - 2.0 * f);
  return W;
}

[[noreturn]] void fail(const std::string& msg, int line) {
  throw KinematicsError("transformation table line " + std::to_string(line) + ": " + msg);
}

}  // namespace

TabulatedTransformation::TabulatedTransformation(int dim, std::vector<double> times, std::vector<Vec> points,
                                                 int grid)
    : dim_(dim), times_(std::move(times)), points_(std::move(points)), grid_(grid) {
  check_dim(dim_);
  if (times_.empty()) throw KinematicsError("transformation table needs at least one time");
  if (!std::is_sorted(times_.begin(), times_.end()) ||
      std::adjacent_find(times_.begin(), times_.end()) != times_.end())
    throw KinematicsError("transformation table times must be strictly increasing");
  if (points_.empty()) throw KinematicsError("transformation table needs at least one macro point");
  if (grid_ < 4) throw KinematicsError("transformation table grid must have at least 4 nodes per axis");
  disp_.assign(times_.size() * points_.size() * node_count() * dim_, 0.0);
}

std::size_t TabulatedTransformation::node_count() const {
  std::size_t n = 1;
  for (int i = 0; i < dim_; ++i) n *= grid_;
  return n;
}

Vec TabulatedTransformation::node_position(std::size_t node) const {
  Vec y(dim_);
  for (int i = dim_ - 1; i >= 0; --i) {
    y(i) = static_cast<double>(node % grid_) / grid_;
    node /= grid_;
  }
  return y;
}

void TabulatedTransformation::set_node(std::size_t it, std::size_t ip, std::size_t node, const Vec& s) {
  const Vec u = s - node_position(node);
  double* dst = &disp_[(slab(it, ip) * node_count() + node) * dim_];
  for (int c = 0; c < dim_; ++c) dst[c] = u(c);
}

std::size_t TabulatedTransformation::nearest_point(const Vec& x) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double dd = (points_[i] - x).squaredNorm();
    if (dd < best_d) {
      best_d = dd;
      best = i;
    }
  }
  return best;
}

Vec TabulatedTransformation::displacement(std::size_t it, std::size_t ip, const Vec& y, Mat* grad) const {
  const int d = dim_;
  Weights W[3];
  for (int i = 0; i < d; ++i) W[i] = catmull_rom(y(i), grid_);
  Vec u = zero_vec(d);
  if (grad) *grad = Mat::Zero(d, d);
  const double* base = &disp_[slab(it, ip) * node_count() * d];
  const int combos = d == 2 ? 16 : 64;
  for (int m = 0; m < combos; ++m) {
    int k[3] = {m & 3, (m >> 2) & 3, (m >> 4) & 3};
    std::size_t node = 0;
    double w = 1.0;
    double dw[3];
    for (int i = 0; i < d; ++i) {
      node = node * grid_ + W[i].idx[k[i]];
      w *= W[i].w[k[i]];
    }
    for (int i = 0; i < d; ++i) {
      dw[i] = W[i].dw[k[i]];
      for (int j = 0; j < d; ++j)
        if (j != i) dw[i] *= W[j].w[k[j]];
    }
    const double* val = base + node * d;
    for (int c = 0; c < d; ++c) {
      u(c) += w * val[c];
      if (grad)
        for (int i = 0; i < d; ++i) (*grad)(c, i) += dw[i] * val[c];
    }
  }
  return u;
}

TabulatedTransformation::Eval TabulatedTransformation::evaluate(double t, const Vec& x, const Vec& y) const {
  const std::size_t ip = nearest_point(x);
  Eval e;
  if (times_.size() == 1) {
    Mat g;
    e.s = y + displacement(0, ip, y, &g);
    e.F = identity_mat(dim_) + g;
    e.v = zero_vec(dim_);
    return e;
  }
  const double tc = std::clamp(t, times_.front(), times_.back());
  std::size_t k = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), tc) - times_.begin());
  k = std::clamp<std::size_t>(k, 1, times_.size() - 1);
  const double t0 = times_[k - 1], t1 = times_[k];
  const double lam = (tc - t0) / (t1 - t0);
  Mat g0, g1;
  const Vec u0 = displacement(k - 1, ip, y, &g0);
  const Vec u1 = displacement(k, ip, y, &g1);
  e.s = y + (1.0 - lam) * u0 + lam * u1;
  e.F = identity_mat(dim_) + (1.0 - lam) * g0 + lam * g1;
  e.v = (u1 - u0) / (t1 - t0);
  return e;
}

TabulatedTransformation TabulatedTransformation::read(std::istream& in) {
  std::string line;
  int lineno = 0;
  auto next = [&](std::istringstream& ss) -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      ss.clear();
      ss.str(line);
      return true;
    }
    return false;
  };

  if (!std::getline(in, line)) fail("empty input", 1);
  ++lineno;
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
  if (line != kHeader) fail(std::string("expected header '") + kHeader + "'", lineno);

  std::istringstream ss;
  std::string key;
  int dim = 0;
  if (!next(ss) || !(ss >> key >> dim) || key != "dim") fail("expected 'dim <d>'", lineno);
  if (dim != 2 && dim != 3) fail("dim must be 2 or 3", lineno);

  std::vector<double> times;
  if (!next(ss) || !(ss >> key) || key != "times") fail("expected 'times ...'", lineno);
  for (double t; ss >> t;) times.push_back(t);
  if (times.empty()) fail("no times listed", lineno);

  std::size_t np = 0;
  if (!next(ss) || !(ss >> key >> np) || key != "points" || np == 0) fail("expected 'points <p>'", lineno);
  std::vector<Vec> points;
  for (std::size_t i = 0; i < np; ++i) {
    if (!next(ss) || !(ss >> key) || key != "point") fail("expected 'point ...'", lineno);
    Vec x(dim);
    for (int c = 0; c < dim; ++c)
      if (!(ss >> x(c))) fail("point needs " + std::to_string(dim) + " coordinates", lineno);
    points.push_back(x);
  }
  int grid = 0;
  if (!next(ss) || !(ss >> key >> grid) || key != "grid") fail("expected 'grid <N>'", lineno);

  TabulatedTransformation tab(dim, times, points, grid);
  std::vector<char> seen(times.size() * np, 0);
  const std::size_t nodes = tab.node_count();
  while (next(ss)) {
    double t;
    std::size_t ip;
    if (!(ss >> t >> ip)) fail("expected '<t> <x-index> values'", lineno);
    std::size_t it = times.size();
    for (std::size_t k = 0; k < times.size(); ++k)
      if (std::abs(times[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) it = k;
    if (it == times.size()) fail("time not listed in header", lineno);
    if (ip >= np) fail("macro point index out of range", lineno);
    for (std::size_t node = 0; node < nodes; ++node) {
      Vec s(dim);
      for (int c = 0; c < dim; ++c)
        if (!(ss >> s(c))) fail("row has too few values", lineno);
      tab.set_node(it, ip, node, s);
    }
    double extra;
    if (ss >> extra) fail("row has too many values", lineno);
    seen[it * np + ip] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) fail("missing (time, point) rows", lineno);
  return tab;
}

TabulatedTransformation TabulatedTransformation::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw KinematicsError("cannot open transformation table " + path);
  return read(in);
}

void TabulatedTransformation::write(std::ostream& out) const {
  out << kHeader << "\n" << std::setprecision(17);
  out << "dim " << dim_ << "\n";
  out << "times";
  for (double t : times_) out << ' ' << t;
  out << "\npoints " << points_.size() << "\n";
  for (const Vec& x : points_) {
    out << "point";
    for (int c = 0; c < dim_; ++c) out << ' ' << x(c);
    out << "\n";
  }
  out << "grid " << grid_ << "\n";
  const std::size_t nodes = node_count();
  for (std::size_t it = 0; it < times_.size(); ++it)
    for (std::size_t ip = 0; ip < points_.size(); ++ip) {
      out << times_[it] << ' ' << ip;
      const double* base = &disp_[slab(it, ip) * nodes * dim_];
      for (std::size_t node = 0; node < nodes; ++node) {
        const Vec y = node_position(node);
        for (int c = 0; c < dim_; ++c) out << ' ' << y(c) + base[node * dim_ + c];
      }
      out << "\n";
    }
}

}  // namespace thermohom
