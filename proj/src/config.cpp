#include "thermohom/config.hpp"

#include "thermohom/output.hpp"
#include "thermohom/tabulated.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace thermohom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class Entries {
public:
  explicit Entries(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  void set(const std::string& section, const std::string& key, const std::string& value, int line) {
    const std::string id = section + "." + key;
    if (map_.count(id)) fail(line, "duplicate key '" + key + "' in section [" + section + "]");
    map_[id] = Entry{value, line, false};
  }

  const Entry* find(const std::string& section, const std::string& key) {
    auto it = map_.find(section + "." + key);
    if (it == map_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  std::optional<std::vector<double>> numbers(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    std::vector<double> out;
    std::string tok;
    std::string v = e->value;
    std::replace(v.begin(), v.end(), ',', ' ');
    std::istringstream in(v);
    while (in >> tok) {
      double x = 0.0;
      const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || p != tok.data() + tok.size())
        fail(e->line, "key '" + key + "': '" + tok + "' is not a number");
      out.push_back(x);
    }
    if (out.empty()) fail(e->line, "key '" + key + "' has no value");
    return out;
  }

  template <class T>
  void number(const std::string& section, const std::string& key, T& target) {
    auto v = numbers(section, key);
    if (!v) return;
    if (v->size() != 1) fail(find(section, key)->line, "key '" + key + "' expects one number");
    if constexpr (std::is_integral_v<T>) {
      if ((*v)[0] != static_cast<double>(static_cast<long long>((*v)[0])))
        fail(find(section, key)->line, "key '" + key + "' expects an integer");
      target = static_cast<T>((*v)[0]);
    } else {
      target = (*v)[0];
    }
  }

  void vec(const std::string& section, const std::string& key, int d, Vec& target) {
    auto v = numbers(section, key);
    if (!v) return;
    if (static_cast<int>(v->size()) != d)
      fail(find(section, key)->line, "key '" + key + "' expects " + std::to_string(d) + " numbers");
    target = Vec::Map(v->data(), d);
  }

  std::optional<std::string> text(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) return std::nullopt;
    return e->value;
  }

  void flag(const std::string& section, const std::string& key, bool& target) {
    const Entry* e = find(section, key);
    if (!e) return;
    if (e->value == "true" || e->value == "1") {
      target = true;
    } else if (e->value == "false" || e->value == "0") {
      target = false;
    } else {
      fail(e->line, "key '" + key + "' expects true or false");
    }
  }

  std::vector<Vec> points(const std::string& section, const std::string& key, int d) {
    const Entry* e = find(section, key);
    std::vector<Vec> out;
    if (!e) return out;
    std::stringstream all(e->value);
    std::string part;
    while (std::getline(all, part, ';')) {
      std::istringstream in(part);
      std::vector<double> xs;
      double x = 0.0;
      while (in >> x) xs.push_back(x);
      if (!in.eof()) fail(e->line, "key '" + key + "': malformed point '" + trim(part) + "'");
      if (static_cast<int>(xs.size()) != d)
        fail(e->line, "key '" + key + "': every point needs " + std::to_string(d) + " coordinates");
      out.push_back(Vec::Map(xs.data(), d));
    }
    return out;
  }

  template <class F>
  void wrap(const std::string& section, const std::string& key, F&& fn) {
    const Entry* e = find(section, key);
    if (!e) return;
    try {
      fn(e->value);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& ex) {
      fail(e->line, ex.what());
    }
  }

  void reject_unknown() const {
    for (const auto& [id, e] : map_) {
      if (e.used) continue;
      const auto dot = id.find('.');
      fail(e.line, "unknown key '" + id.substr(dot + 1) + "' in section [" + id.substr(0, dot) + "]");
    }
  }

private:
  std::string source_;
  std::map<std::string, Entry> map_;
};

const char* kSections[] = {"model", "time", "transformation", "material", "sources", "initial",
                           "solver", "coupling", "reference", "effective", "cell", "output"};

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).string();
}

Mat conductivity(Entries& en, const std::string& key, int d) {
  auto v = en.numbers("material", key);
  if (!v) return identity_mat(d);
  if (v->size() == 1) return (*v)[0] * identity_mat(d);
  if (static_cast<int>(v->size()) != d * d)
    en.fail(en.find("material", key)->line, "key '" + key + "' expects 1 or " + std::to_string(d * d) + " numbers");
  Mat K(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) K(i, j) = (*v)[i * d + j];
  return K;
}

}  // namespace

void RunConfig::validate() const {
  model.validate();
  auto bad = [](const std::string& field, const std::string& why) { throw ConfigError("invalid " + field + ": " + why); };
  for (const auto* list : {&eps_list, &check_eps}) {
    const std::string field = list == &eps_list ? "eps" : "check_eps";
    if (list->empty()) bad(field, "needs at least one value");
    for (double e : *list) {
      if (!(e > 0.0) || e > 1.0) bad(field, "values must lie in (0, 1]");
      const double inv = 1.0 / e;
      if (std::abs(inv - std::round(inv)) > 1e-9) bad(field, "values must be 1/k for an integer k");
    }
  }
  for (double t : t_samples)
    if (!(t >= 0.0)) bad("t_samples", "must be >= 0");
  for (double t : effective_times)
    if (!(t >= 0.0)) bad("effective.times", "must be >= 0");
  if (probes < 1) bad("probes", "must be >= 1");
  if (!(cell_t >= 0.0)) bad("cell.t", "must be >= 0");
  if (workers < 1) bad("workers", "must be >= 1");
  if (output_dir.empty()) bad("output.directory", "must not be empty");
  if (model.transformation.family == Family::UserTabulated && transformation_table.empty())
    bad("transformation.table", "required for the tabulated family");
}

std::vector<double> RunConfig::resolved_t_samples() const {
  if (!t_samples.empty()) return t_samples;
  return {0.0, 0.5 * model.T, model.T};
}

std::vector<double> RunConfig::resolved_effective_times() const {
  if (!effective_times.empty()) return effective_times;
  return {0.0, 0.5 * model.T, model.T};
}

std::vector<Vec> RunConfig::resolved_effective_points() const {
  if (!effective_points.empty()) return effective_points;
  return {Vec::Constant(model.dim, 0.5)};
}

Vec RunConfig::resolved_cell_x() const { return cell_x.size() ? cell_x : Vec::Constant(model.dim, 0.5); }

std::string RunConfig::echo() const {
  const ModelSetup& m = model;
  const int d = m.dim;
  std::ostringstream o;
  auto num = [](double v) { return format_double(v); };
  auto list = [&](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
    return s;
  };
  auto vec = [&](const Vec& v) { return list(std::vector<double>(v.data(), v.data() + v.size())); };
  auto mat = [&](const Mat& M) {
    std::vector<double> v;
    for (int i = 0; i < M.rows(); ++i)
      for (int j = 0; j < M.cols(); ++j) v.push_back(M(i, j));
    return list(v);
  };
  auto pts = [&](const std::vector<Vec>& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "; " : "") + vec(p[i]);
    return s;
  };
  const auto& tr = m.transformation;
  const auto& mt = m.material;
  o << "[model]\ndim = " << d << "\nradius = " << num(m.radius) << "\ncell_n = " << m.cell_n
    << "\nmacro_n = " << m.macro_n << "\n";
  o << "[time]\nT = " << num(m.T) << "\ndt = " << num(m.dt) << "\n";
  o << "[transformation]\nfamily = " << family_name(tr.family) << "\nrate = " << num(tr.radial.rate)
    << "\nquad = " << num(tr.radial.quad) << "\nx_slope = " << num(tr.radial.x_slope)
    << "\ninner = " << num(tr.radial.inner) << "\nouter = " << num(tr.radial.outer)
    << "\nmargin = " << num(tr.boundary_margin) << "\nc_s = " << num(tr.c_s) << "\nC_s = " << num(tr.C_s)
    << "\ntable = " << transformation_table << "\n";
  o << "[material]\n";
  for (int p = 0; p < 2; ++p) {
    const char* ph = p == 0 ? "A" : "B";
    o << "lambda_" << ph << " = " << num(lambda[p]) << "\nmu_" << ph << " = " << num(mu[p]) << "\n";
    o << "K_" << ph << " = " << mat(mt.K[p]) << "\n";
    o << "alpha_" << ph << " = " << num(mt.alpha[p]) << "\ngamma_" << ph << " = " << num(mt.gamma[p]) << "\nrho_"
      << ph << " = " << num(mt.rho[p]) << "\ncd_" << ph << " = " << num(mt.cd[p]) << "\n";
  }
  o << "sigma0 = " << num(mt.sigma0) << "\nL = " << num(mt.L) << "\n";
  o << "[sources]\nf_u_A = " << vec(m.sources.f_u[0]) << "\nf_u_B = " << vec(m.sources.f_u[1])
    << "\nf_theta_A = " << num(m.sources.f_theta[0]) << "\nf_theta_B = " << num(m.sources.f_theta[1])
    << "\ntable = " << source_table << "\n";
  o << "[initial]\nprofile = " << InitialTemperature::profile_name(m.theta0.profile)
    << "\nmean = " << num(m.theta0.mean) << "\namplitude = " << num(m.theta0.amplitude) << "\n";
  o << "[solver]\ncg_tol = " << num(m.cg_tol) << "\nfixed_point_tol = " << num(m.fixed_point_tol)
    << "\nfixed_point_max_iter = " << m.fixed_point_max_iter
    << "\nmicro_per_element = " << (m.micro_per_element ? "true" : "false")
    << "\ncache_t_quantum = " << num(m.t_quantum()) << "\ncache_x_quantum = " << num(m.x_quantum()) << "\n";
  o << "[coupling]\ninterpretation = " << interpretation_name(m.effective.interpretation)
    << "\nlatent_heat_in_Weff = " << (m.effective.latent_heat_in_Weff ? "true" : "false")
    << "\nlatent_sign = " << num(m.latent_sign) << "\n";
  o << "[reference]\neps = " << list(eps_list) << "\ncheck_eps = " << list(check_eps) << "\nt_samples = " << list(resolved_t_samples())
    << "\nprobes = " << probes << "\n";
  o << "[effective]\ntimes = " << list(resolved_effective_times())
    << "\npoints = " << pts(resolved_effective_points()) << "\n";
  o << "[cell]\nt = " << num(cell_t) << "\nx = " << vec(resolved_cell_x()) << "\n";
  o << "[output]\nvtk = " << (vtk ? "true" : "false") << "\n";
  return o.str();
}

RunConfig parse_config(std::istream& in, const std::string& source_name, const std::string& base_dir) {
  Entries en(source_name);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') en.fail(lineno, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(std::begin(kSections), std::end(kSections), section) == std::end(kSections))
        en.fail(lineno, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) en.fail(lineno, "expected 'key = value'");
    if (section.empty()) en.fail(lineno, "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) en.fail(lineno, "empty key");
    en.set(section, key, value, lineno);
  }

  RunConfig rc;
  ModelSetup& m = rc.model;
  en.number("model", "dim", m.dim);
  if (m.dim != 2 && m.dim != 3) en.fail(en.find("model", "dim")->line, "invalid dim: must be 2 or 3");
  const int d = m.dim;
  en.number("model", "radius", m.radius);
  en.number("model", "cell_n", m.cell_n);
  en.number("model", "macro_n", m.macro_n);
  en.number("time", "T", m.T);
  en.number("time", "dt", m.dt);

  // Transformation: defaults derived from radius and margin, then overrides.
  Family family = Family::RadialGrowth;
  en.wrap("transformation", "family", [&](const std::string& v) { family = parse_family(v); });
  double margin = 0.1;
  en.number("transformation", "margin", margin);
  double rate = 0.1;
  en.number("transformation", "rate", rate);
  Transformation tr = Transformation::radial_growth(d, rate, m.radius, margin);
  tr.family = family;
  en.number("transformation", "quad", tr.radial.quad);
  en.number("transformation", "x_slope", tr.radial.x_slope);
  en.number("transformation", "inner", tr.radial.inner);
  en.number("transformation", "outer", tr.radial.outer);
  en.number("transformation", "c_s", tr.c_s);
  en.number("transformation", "C_s", tr.C_s);
  if (auto t = en.text("transformation", "table"); t && !t->empty()) {
    rc.transformation_table = *t;
    en.wrap("transformation", "table", [&](const std::string& v) {
      tr.table = std::make_shared<const TabulatedTransformation>(TabulatedTransformation::load(resolve(base_dir, v)));
    });
  }
  m.transformation = tr;

  MaterialParams mt = MaterialParams::defaults(d);
  for (int p = 0; p < 2; ++p) {
    const std::string ph = p == 0 ? "A" : "B";
    en.number("material", "lambda_" + ph, rc.lambda[p]);
    en.number("material", "mu_" + ph, rc.mu[p]);
    mt.C[p] = isotropic_stiffness(d, rc.lambda[p], rc.mu[p]);
    mt.K[p] = conductivity(en, "K_" + ph, d);
    en.number("material", "alpha_" + ph, mt.alpha[p]);
    en.number("material", "gamma_" + ph, mt.gamma[p]);
    en.number("material", "rho_" + ph, mt.rho[p]);
    en.number("material", "cd_" + ph, mt.cd[p]);
  }
  en.number("material", "sigma0", mt.sigma0);
  en.number("material", "L", mt.L);
  m.material = mt;

  m.sources = Sources::zero(d);
  en.vec("sources", "f_u_A", d, m.sources.f_u[0]);
  en.vec("sources", "f_u_B", d, m.sources.f_u[1]);
  en.number("sources", "f_theta_A", m.sources.f_theta[0]);
  en.number("sources", "f_theta_B", m.sources.f_theta[1]);
  if (auto t = en.text("sources", "table"); t && !t->empty()) {
    rc.source_table = *t;
    en.wrap("sources", "table", [&](const std::string& v) {
      Sources s = Sources::load_table(resolve(base_dir, v));
      if (static_cast<int>(s.f_u[0].size()) != d) throw ConfigError("source table dimension mismatch");
      m.sources = s;
    });
  }

  en.wrap("initial", "profile",
          [&](const std::string& v) { m.theta0.profile = InitialTemperature::parse_profile(v); });
  en.number("initial", "mean", m.theta0.mean);
  en.number("initial", "amplitude", m.theta0.amplitude);

  en.number("solver", "cg_tol", m.cg_tol);
  en.number("solver", "fixed_point_tol", m.fixed_point_tol);
  en.number("solver", "fixed_point_max_iter", m.fixed_point_max_iter);
  en.flag("solver", "micro_per_element", m.micro_per_element);
  en.number("solver", "cache_t_quantum", m.cache_t_quantum);
  en.number("solver", "cache_x_quantum", m.cache_x_quantum);

  en.wrap("coupling", "interpretation",
          [&](const std::string& v) { m.effective.interpretation = parse_interpretation(v); });
  en.flag("coupling", "latent_heat_in_Weff", m.effective.latent_heat_in_Weff);
  en.number("coupling", "latent_sign", m.latent_sign);

  if (auto v = en.numbers("reference", "eps")) rc.eps_list = *v;
  if (auto v = en.numbers("reference", "check_eps")) rc.check_eps = *v;
  if (auto v = en.numbers("reference", "t_samples")) rc.t_samples = *v;
  en.number("reference", "probes", rc.probes);
  if (auto v = en.numbers("effective", "times")) rc.effective_times = *v;
  rc.effective_points = en.points("effective", "points", d);
  en.number("cell", "t", rc.cell_t);
  en.vec("cell", "x", d, rc.cell_x);
  if (auto v = en.text("output", "directory")) rc.output_dir = *v;
  en.flag("output", "vtk", rc.vtk);
  en.number("output", "workers", rc.workers);

  en.reject_unknown();
  try {
    rc.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return rc;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path, std::filesystem::path(path).parent_path().string());
}

RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace thermohom
