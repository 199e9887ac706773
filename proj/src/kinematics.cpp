#include "thermohom/kinematics.hpp"

#include "thermohom/tabulated.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>

namespace thermohom {

const char* family_name(Family f) {
  switch (f) {
    case Family::Identity: return "identity";
    case Family::RadialGrowth: return "radial_growth";
    case Family::UserTabulated: return "tabulated";
  }
  return "?";
}

Family parse_family(const std::string& name) {
  if (name == "identity") return Family::Identity;
  if (name == "radial_growth") return Family::RadialGrowth;
  if (name == "tabulated") return Family::UserTabulated;
  throw KinematicsError("unknown transformation family '" + name + "'");
}

Transformation Transformation::identity(int d) {
  check_dim(d);
  Transformation tr;
  tr.family = Family::Identity;
  tr.dim = d;
  return tr;
}

Transformation Transformation::radial_growth(int d, double rate, double r, double margin) {
  check_dim(d);
  Transformation tr;
  tr.family = Family::RadialGrowth;
  tr.dim = d;
  tr.boundary_margin = margin;
  tr.radial.rate = rate;
  tr.radial.outer = 0.5 - 0.5 * margin;
  tr.radial.inner = r + (tr.radial.outer - r) / 3.0;
  return tr;
}

void Transformation::validate() const {
  check_dim(dim);
  if (!(c_s > 0.0) || !(C_s >= c_s)) throw KinematicsError("det bounds must satisfy 0 < c_s <= C_s");
  if (!(boundary_margin > 0.0) || boundary_margin >= 0.5)
    throw KinematicsError("boundary margin must lie in (0, 0.5)");
  if (family == Family::RadialGrowth) {
    if (!(radial.inner > 0.0) || !(radial.outer > radial.inner))
      throw KinematicsError("radial cutoff needs 0 < inner < outer");
    if (radial.outer > 0.5 - 0.5 * boundary_margin + 1e-14)
      throw KinematicsError("radial cutoff outer radius reaches the fixed boundary layer");
  }
  if (family == Family::UserTabulated) {
    if (!table) throw KinematicsError("tabulated transformation without table");
    if (table->dim() != dim) throw KinematicsError("tabulated transformation dimension mismatch");
  }
}

double Transformation::amplitude(double t, const Vec& x) const {
  double slope = 1.0;
  for (int i = 0; i < x.size(); ++i) slope += radial.x_slope * (x(i) - 0.5);
  return (radial.rate * t + radial.quad * t * t) * slope;
}

double Transformation::amplitude_rate(double t, const Vec& x) const {
  double slope = 1.0;
  for (int i = 0; i < x.size(); ++i) slope += radial.x_slope * (x(i) - 0.5);
  return (radial.rate + 2.0 * radial.quad * t) * slope;
}

bool Transformation::x_independent() const {
  switch (family) {
    case Family::Identity: return true;
    case Family::RadialGrowth: return radial.x_slope == 0.0;
    case Family::UserTabulated: return table->points().size() == 1;
  }
  return false;
}

bool Transformation::is_static() const {
  if (family == Family::Identity) return true;
  if (family == Family::RadialGrowth) return radial.rate == 0.0 && radial.quad == 0.0;
  return false;
}

Cutoff radial_cutoff(const RadialGrowthParams& p, double rho) {
  if (rho <= p.inner) return {1.0, 0.0, 0.0};
  if (rho >= p.outer) return {0.0, 0.0, 0.0};
  const double w = p.outer - p.inner;
  const double s = (rho - p.inner) / w;
  const double S = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
  const double dS = 30.0 * s * s * (1.0 - s) * (1.0 - s);
  const double d2S = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
  return {1.0 - S, -dS / w, -d2S / (w * w)};
}

namespace {

void check_point(const Transformation& tr, const Vec& y) {
  if (y.size() != tr.dim) throw KinematicsError("cell point has wrong dimension");
  for (int i = 0; i < y.size(); ++i)
    if (!(y(i) >= -1e-12 && y(i) <= 1.0 + 1e-12)) {
      std::ostringstream os;
      os << "cell point component " << i << " = " << y(i) << " outside [0,1]";
      throw KinematicsError(os.str());
    }
}

double det(const Mat& F) { return F.determinant(); }

}  // namespace

Vec Transformation::map(double t, const Vec& x, const Vec& y) const {
  switch (family) {
    case Family::Identity: return y;
    case Family::RadialGrowth: {
      const Vec w = y - center();
      const double eta = radial_cutoff(radial, w.norm()).eta;
      return y + amplitude(t, x) * eta * w;
    }
    case Family::UserTabulated: return table->evaluate(t, x, y).s;
  }
  return y;
}

KinematicSample eval_kinematics(const Transformation& tr, double t, const Vec& x, const Vec& y) {
  check_point(tr, y);
  const int d = tr.dim;
  KinematicSample k;
  switch (tr.family) {
    case Family::Identity:
      k.F = identity_mat(d);
      k.v = zero_vec(d);
      break;
    case Family::RadialGrowth: {
      const Vec w = y - tr.center();
      const double rho = w.norm();
      const Cutoff c = radial_cutoff(tr.radial, rho);
      const double g = tr.amplitude(t, x);
      k.F = identity_mat(d) * (1.0 + g * c.eta);
      if (c.deta != 0.0) k.F += (g * c.deta / rho) * (w * w.transpose());
      k.v = tr.amplitude_rate(t, x) * c.eta * w;
      break;
    }
    case Family::UserTabulated: {
      auto e = tr.table->evaluate(t, x, y);
      k.F = e.F;
      k.v = e.v;
      break;
    }
  }
  k.J = det(k.F);
  if (!(k.J > 0.0)) {
    std::ostringstream os;
    os << "non-positive Jacobian " << k.J << " at t=" << t;
    throw KinematicsError(os.str());
  }
  return k;
}

namespace {

// F^{-1} n, with n the pushforward of the radial extension of the reference normal.
Vec pulled_normal(const Transformation& tr, double t, const Vec& x, const Vec& z) {
  const Vec w = z - tr.center();
  const Vec n0 = w / w.norm();
  const KinematicSample k = eval_kinematics(tr, t, x, z);
  const Mat Finv = inverse(k.F);
  Vec n = Finv.transpose() * n0;
  n /= n.norm();
  return Finv * n;
}

}  // namespace

InterfaceSample eval_interface(const Transformation& tr, double t, const Vec& x, const Vec& y,
                               const Vec& n0, double h) {
  const KinematicSample k = eval_kinematics(tr, t, x, y);
  const int d = tr.dim;
  const Mat Finv = inverse(k.F);
  Vec n = Finv.transpose() * n0;
  const double len = n.norm();
  if (len < 1e-12) throw KinematicsError("degenerate pushforward normal");
  InterfaceSample s;
  s.n = n / len;
  s.W = k.v.dot(s.n);

  const Vec w = y - tr.center();
  const double rho = w.norm();
  if (rho < 1e-12) throw KinematicsError("interface point at the cell center");
  switch (tr.family) {
    case Family::Identity: s.H = -(d - 1) / rho; break;
    case Family::RadialGrowth: {
      const Cutoff c = radial_cutoff(tr.radial, rho);
      const double g = tr.amplitude(t, x);
      const double a = 1.0 + g * (c.eta + rho * c.deta);
      const double da = g * (2.0 * c.deta + rho * c.d2eta);
      s.H = da / (a * a) - (d - 1) / (rho * a);
      break;
    }
    case Family::UserTabulated: {
      double div = 0.0;
      for (int i = 0; i < d; ++i) {
        Vec yp = y, ym = y;
        yp(i) += h;
        ym(i) -= h;
        div += (pulled_normal(tr, t, x, yp)(i) - pulled_normal(tr, t, x, ym)(i)) / (2.0 * h);
      }
      s.H = -div;
      break;
    }
  }
  return s;
}

MaterialParams MaterialParams::defaults(int d) {
  check_dim(d);
  MaterialParams m;
  m.dim = d;
  m.C = {isotropic_stiffness(d, 1.0, 1.0), isotropic_stiffness(d, 1.0, 1.0)};
  m.K = {identity_mat(d), identity_mat(d)};
  return m;
}

void MaterialParams::validate() const {
  check_dim(dim);
  for (int p = 0; p < 2; ++p) {
    const char* ph = phase_name(static_cast<Phase>(p));
    const std::string tag = std::string(" (phase ") + ph + ")";
    if (C[p].rows() != dim * dim || C[p].cols() != dim * dim)
      throw Error("stiffness has wrong shape" + tag);
    const double scale = std::max(1.0, C[p].cwiseAbs().maxCoeff());
    if (minor_symmetry_defect(C[p]) > 1e-12 * scale) throw Error("stiffness lacks minor symmetry" + tag);
    if (major_symmetry_defect(C[p]) > 1e-12 * scale) throw Error("stiffness lacks major symmetry" + tag);
    if (!(min_mandel_eigenvalue(C[p]) > 0.0)) throw Error("stiffness not positive definite" + tag);
    if (K[p].rows() != dim || K[p].cols() != dim) throw Error("conductivity has wrong shape" + tag);
    if ((K[p] - K[p].transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, K[p].cwiseAbs().maxCoeff()))
      throw Error("conductivity not symmetric" + tag);
    Eigen::SelfAdjointEigenSolver<Mat> es(K[p], Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw Error("conductivity not positive definite" + tag);
    if (!(alpha[p] >= 0.0)) throw Error("alpha must be non-negative" + tag);
    if (!(gamma[p] >= 0.0)) throw Error("gamma must be non-negative" + tag);
    if (!(rho[p] > 0.0)) throw Error("density must be positive" + tag);
    if (!(cd[p] > 0.0)) throw Error("heat capacity must be positive" + tag);
  }
  if (!(sigma0 >= 0.0)) throw Error("surface tension must be non-negative");
  if (!std::isfinite(L)) throw Error("latent heat must be finite");
}

Sources Sources::zero(int d) {
  Sources s;
  s.f_u = {zero_vec(d), zero_vec(d)};
  return s;
}

Sources Sources::at(double t) const {
  if (table.empty()) return *this;
  Sources s;
  s.f_u = table.front().f_u;
  s.f_theta = table.front().f_theta;
  if (t <= table.front().t) return s;
  if (t >= table.back().t) {
    s.f_u = table.back().f_u;
    s.f_theta = table.back().f_theta;
    return s;
  }
  auto hi = std::upper_bound(table.begin(), table.end(), t, [](double v, const Row& r) { return v < r.t; });
  auto lo = hi - 1;
  const double w = (t - lo->t) / (hi->t - lo->t);
  for (int p = 0; p < 2; ++p) {
    s.f_u[p] = (1.0 - w) * lo->f_u[p] + w * hi->f_u[p];
    s.f_theta[p] = (1.0 - w) * lo->f_theta[p] + w * hi->f_theta[p];
  }
  return s;
}

Sources Sources::read_table(std::istream& in) {
  std::string magic;
  int d = 0;
  long rows = 0;
  if (!(in >> magic >> d >> rows) || magic != "thermohom-sources")
    throw Error("source table: expected header 'thermohom-sources <d> <#rows>'");
  check_dim(d);
  if (rows < 1) throw Error("source table: needs at least one row");
  Sources s = zero(d);
  for (long r = 0; r < rows; ++r) {
    Row row;
    if (!(in >> row.t)) throw Error("source table: row " + std::to_string(r + 1) + " is incomplete");
    for (int p = 0; p < 2; ++p) {
      row.f_u[p] = zero_vec(d);
      for (int i = 0; i < d; ++i)
        if (!(in >> row.f_u[p](i))) throw Error("source table: row " + std::to_string(r + 1) + " is incomplete");
    }
    if (!(in >> row.f_theta[0] >> row.f_theta[1]))
      throw Error("source table: row " + std::to_string(r + 1) + " is incomplete");
    if (!s.table.empty() && !(row.t > s.table.back().t))
      throw Error("source table: times must increase strictly (row " + std::to_string(r + 1) + ")");
    s.table.push_back(row);
  }
  s.f_u = s.table.front().f_u;
  s.f_theta = s.table.front().f_theta;
  return s;
}

Sources Sources::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open source table '" + path + "'");
  return read_table(in);
}

TransformedCoefficients pull_back(const KinematicSample& k, const MaterialParams& mat, Phase phase,
                                  const Sources* sources) {
  const int d = static_cast<int>(k.F.rows());
  const int p = phase_index(phase);
  const Mat Finv = inverse(k.F);
  const Mat G = Finv.transpose();
  TransformedCoefficients c;
  c.J = k.J;
  c.A_op = symmetrizer(G);
  c.C_ref = minor_symmetrize(k.J * (c.A_op.transpose() * mat.C[p] * c.A_op));
  c.alpha_ref = k.J * mat.alpha[p] * G;
  c.gamma_ref = k.J * mat.gamma[p] * G;
  c.c_ref = k.J * mat.rho[p] * mat.cd[p];
  c.K_ref = k.J * Finv * mat.K[p] * G;
  c.K_ref = sym(c.K_ref);
  c.v_ref = Finv * k.v;
  c.H_ref = Mat::Zero(d, d);
  if (sources) {
    c.f_u_ref = k.J * sources->f_u[p];
    c.f_theta_ref = k.J * sources->f_theta[p];
  } else {
    c.f_u_ref = zero_vec(d);
  }
  return c;
}

TransformedCoefficients transformed_coefficients(const Transformation& tr, const MaterialParams& mat,
                                                 Phase phase, double t, const Vec& x, const Vec& y,
                                                 const Sources* sources, const Vec* n0) {
  const KinematicSample k = eval_kinematics(tr, t, x, y);
  TransformedCoefficients c;
  if (sources && !sources->table.empty()) {
    const Sources now = sources->at(t);
    c = pull_back(k, mat, phase, &now);
  } else {
    c = pull_back(k, mat, phase, sources);
  }
  if (n0) {
    const InterfaceSample s = eval_interface(tr, t, x, y, *n0);
    c.on_interface = true;
    c.W_ref = k.J * s.W;
    c.H_ref = k.J * mat.sigma0 * s.H * inverse(k.F);
  }
  return c;
}

MaterialParams scaled_coefficients(const MaterialParams& mat, double eps) {
  if (!(eps > 0.0)) throw Error("eps must be positive");
  MaterialParams m = mat;
  const int b = phase_index(Phase::B);
  m.C[b] *= eps * eps;
  m.K[b] *= eps * eps;
  m.alpha[b] *= eps;
  m.gamma[b] *= eps;
  return m;
}

AdmissibilityReport validate_admissibility(const Transformation& tr, const AdmissibilityOptions& opt) {
  tr.validate();
  const int d = tr.dim;
  AdmissibilityReport rep;
  rep.min_J = std::numeric_limits<double>::infinity();
  rep.max_J = -rep.min_J;
  rep.interface_clearance = rep.min_J;

  auto record = [&](const std::string& what, double t, const Vec& x, const Vec& y, double value) {
    rep.ok = false;
    if (rep.violations.size() < opt.max_violations) rep.violations.push_back({what, t, x, y, value});
  };

  // Macro samples: cell center and corners of the unit domain (amplitudes are affine in x).
  std::vector<Vec> xs{Vec::Constant(d, 0.5)};
  for (int m = 0; m < (1 << d); ++m) {
    Vec x(d);
    for (int i = 0; i < d; ++i) x(i) = (m >> i) & 1;
    xs.push_back(x);
  }
  const int nt = std::max(opt.time_samples, 1);
  std::vector<double> ts;
  for (int i = 0; i < nt; ++i) ts.push_back(nt == 1 ? 0.0 : opt.T * i / (nt - 1));

  const int N = opt.grid;
  long total = 1;
  for (int i = 0; i < d; ++i) total *= N;

  for (double t : ts)
    for (const Vec& x : xs) {
      for (long flat = 0; flat < total; ++flat) {
        Vec y(d);
        long r = flat;
        for (int i = d - 1; i >= 0; --i) {
          y(i) = (static_cast<double>(r % N) + 0.5) / N;
          r /= N;
        }
        KinematicSample k;
        try {
          k = eval_kinematics(tr, t, x, y);
        } catch (const KinematicsError&) {
          rep.min_J = std::min(rep.min_J, 0.0);
          record("J <= 0", t, x, y, 0.0);
          continue;
        }
        rep.min_J = std::min(rep.min_J, k.J);
        rep.max_J = std::max(rep.max_J, k.J);
        if (k.J < tr.c_s) record("J below c_s", t, x, y, k.J);
        if (k.J > tr.C_s) record("J above C_s", t, x, y, k.J);
        rep.max_F = std::max(rep.max_F, k.F.norm());
        rep.max_Finv = std::max(rep.max_Finv, inverse(k.F).norm());
        rep.max_v = std::max(rep.max_v, k.v.norm());
        double dist = 1.0;
        for (int i = 0; i < d; ++i) dist = std::min({dist, y(i), 1.0 - y(i)});
        if (dist < 0.5 * tr.boundary_margin) {
          const double defect = std::max((tr.map(t, x, y) - y).cwiseAbs().maxCoeff(),
                                         (k.F - identity_mat(d)).cwiseAbs().maxCoeff());
          rep.boundary_fixed_defect = std::max(rep.boundary_fixed_defect, defect);
          if (defect > 0.0) record("s != y near the cell boundary", t, x, y, defect);
        }
      }

      // Interface samples on the reference circle/sphere.
      const int m = opt.interface_samples;
      std::vector<Vec> dirs;
      if (d == 2) {
        for (int i = 0; i < m; ++i) {
          const double a = 2.0 * M_PI * i / m;
          Vec u(2);
          u << std::cos(a), std::sin(a);
          dirs.push_back(u);
        }
      } else {
        // Fibonacci sphere
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        for (int i = 0; i < m; ++i) {
          const double z = 1.0 - 2.0 * (i + 0.5) / m;
          const double rr = std::sqrt(1.0 - z * z);
          Vec u(3);
          u << rr * std::cos(golden * i), rr * std::sin(golden * i), z;
          dirs.push_back(u);
        }
      }
      for (const Vec& u : dirs) {
        const Vec y = tr.center() + opt.interface_radius * u;
        Vec sy;
        try {
          sy = tr.map(t, x, y);
          const InterfaceSample is = eval_interface(tr, t, x, y, u);
          rep.max_W = std::max(rep.max_W, std::abs(is.W));
          rep.max_H = std::max(rep.max_H, std::abs(is.H));
        } catch (const KinematicsError& e) {
          record(std::string("interface evaluation failed: ") + e.what(), t, x, y, 0.0);
          continue;
        }
        double dist = 1.0;
        for (int i = 0; i < d; ++i) dist = std::min({dist, sy(i), 1.0 - sy(i)});
        const double clearance = dist - tr.boundary_margin;
        rep.interface_clearance = std::min(rep.interface_clearance, clearance);
        if (clearance <= 0.0) record("deformed interface within c of the cell boundary", t, x, y, dist);
      }
    }
  rep.det_margin = std::min(rep.min_J - tr.c_s, tr.C_s - rep.max_J);
  return rep;
}

}  // namespace thermohom
