#include "chac/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "chac/philox.hpp"

namespace chac {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string strip_quotes(const std::string& s) {
  if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                        (s.front() == '\'' && s.back() == '\'')))
    return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

void ConfigMap::set(const std::string& key, const std::string& raw) {
  values_[key] = raw;
}

bool ConfigMap::has(const std::string& key) const {
  consumed_.insert(key);
  return values_.count(key) > 0;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  return it == values_.end() ? fallback : strip_quotes(it->second);
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + it->second + "'");
  }
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, double(fallback));
  if (v != std::floor(v)) throw ConfigError(key, "expected an integer");
  return int(v);
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = strip_quotes(it->second);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true/false, got '" + v + "'");
}

std::vector<double> ConfigMap::get_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
  consumed_.insert(key);
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::string v = trim(it->second);
  if (v.empty() || v.front() != '[' || v.back() != ']')
    throw ConfigError(key, "expected a [..] list");
  v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError(key, "bad list element '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> ConfigMap::unknown_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!consumed_.count(k)) out.push_back(k);
  return out;
}

std::string ConfigMap::canonical_text() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno), "unterminated [section]");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("line " + std::to_string(lineno), "empty key or value");
    if (!section.empty()) key = section + "." + key;
    map.set(key, val);
  }
  return map;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

SpectralFieldd build_initial_field(const ConfigMap& map, int modes, int dim,
                                   std::uint64_t seed) {
  SpectralFieldd u0 = SpectralFieldd::zero(modes, dim);
  const std::string kind = map.get_string("initial.kind", "zero");
  if (kind == "zero") {
    return u0;
  }
  if (kind == "constant") {
    const double value = map.get_double("initial.value", 1.0);
    u0.coeffs[0] = value * std::pow(std::numbers::pi, dim / 2.0);
    return u0;
  }
  if (kind == "single_mode") {
    const std::vector<double> kd = map.get_list("initial.k", {1});
    if (int(kd.size()) != dim) throw ConfigError("initial.k", "need one entry per axis");
    MultiIndex m;
    m.dim = dim;
    for (int i = 0; i < dim; ++i) {
      m.k[i] = int(kd[i]);
      if (m.k[i] < 0 || m.k[i] >= modes)
        throw ConfigError("initial.k", "mode outside [0, modes)");
    }
    u0.coeffs[flatten_index(m, modes)] = map.get_double("initial.amplitude", 1.0);
    return u0;
  }
  if (kind == "smooth_random") {
    const double amp = map.get_double("initial.amplitude", 0.5);
    const double decay = map.get_double("initial.decay", 32.0);
    const Eigen::ArrayXd lam = lambda_lattice(modes, dim);
    GaussianStream g(seed, /*stream=*/2, 0, 0);
    for (Eigen::Index i = 0; i < u0.coeffs.size(); ++i)
      u0.coeffs[i] = amp * g.next() * std::exp(-lam[i] / decay);
    return u0;
  }
  if (kind == "holder") {
    // lacunary cosine series along axis 0: amplitude 2^{-delta j} at mode 2^j
    const double delta = map.get_double("initial.delta", 0.5);
    const double amp = map.get_double("initial.amplitude", 1.0);
    const std::int64_t stride = pow_int(modes, dim - 1);
    for (int j = 0; (1 << j) < modes; ++j) {
      MultiIndex m;
      m.dim = dim;
      m.k[0] = 1 << j;
      u0.coeffs[(1 << j) * stride] = amp * std::pow(2.0, -delta * j);
      (void)m;
    }
    return u0;
  }
  throw ConfigError("initial.kind", "unknown kind '" + kind + "'");
}

SimConfig build_sim_config(const ConfigMap& map) {
  SimConfig cfg;
  cfg.dim = map.get_int("model.d", 1);
  cfg.op.rho = map.get_double("model.rho", 1.0);
  cfg.op.qtilde = map.get_double("model.qtilde", 1.0);

  const std::string form = map.get_string("model.sigma_form", "smooth_sublinear");
  if (form == "smooth_sublinear")
    cfg.sigma.form = SigmaSpec::Form::sublinear;
  else if (form == "constant")
    cfg.sigma.form = SigmaSpec::Form::constant;
  else if (form == "table")
    cfg.sigma.form = SigmaSpec::Form::table;
  else
    throw ConfigError("model.sigma_form", "unknown form '" + form + "'");
  cfg.sigma.alpha = map.get_double("model.alpha", 0.1);
  cfg.sigma.c = map.get_double("model.c_sigma", 1.0);
  if (cfg.sigma.form == SigmaSpec::Form::table) {
    const auto tu = map.get_list("model.sigma_table_u", {});
    const auto tv = map.get_list("model.sigma_table_v", {});
    if (tu.size() != tv.size() || tu.size() < 2)
      throw ConfigError("model.sigma_table_u", "need matching u/v tables, length >= 2");
    cfg.sigma.table_u = tu;
    cfg.sigma.table_v = tv;
  }

  if (map.has("model.f_poly")) {
    const auto poly = map.get_list("model.f_poly", {});
    if (poly.empty()) {
      cfg.f.enabled = false;
    } else if (poly.size() == 4) {
      cfg.f = CubicPoly{poly[0], poly[1], poly[2], poly[3], true};
    } else {
      throw ConfigError("model.f_poly", "expected [a, b, c, e] or []");
    }
  }
  if (!map.get_bool("model.nonlinearity", true)) cfg.f.enabled = false;

  const int default_modes = cfg.dim == 1 ? 256 : (cfg.dim == 2 ? 64 : 32);
  cfg.modes = map.get_int("discretization.n_modes", default_modes);
  cfg.dt = map.get_double("discretization.dt", 1e-4);
  cfg.t_end = map.get_double("discretization.t_end", 0.5);
  cfg.dealias_pad = map.get_double("discretization.dealias_pad", 2.0);
  const std::string nw = map.get_string("discretization.noise_weight", "leftpoint");
  if (nw == "leftpoint")
    cfg.noise_weight = NoiseWeight::leftpoint;
  else if (nw == "phi1")
    cfg.noise_weight = NoiseWeight::phi1;
  else
    throw ConfigError("discretization.noise_weight", "expected leftpoint or phi1");

  cfg.cutoff.enabled = map.get_bool("cutoff.enabled", false);
  cfg.cutoff.level = map.get_double("cutoff.level", 8.0);
  cfg.q_norm = map.get_double("cutoff.q_norm", cfg.dim == 3 ? 6.0 : 4.0);
  cfg.cutoff.q = cfg.q_norm;

  cfg.seed = std::uint64_t(map.get_double("run.seed", 20260809));
  cfg.paths = map.get_int("run.paths", 1);
  cfg.snapshot_stride = map.get_int("run.snapshot_stride", 0);
  const int nprobes = map.get_int("run.probe_points", 0);
  if (nprobes > 0) {
    const std::int64_t total = pow_int(cfg.modes, cfg.dim);
    for (int i = 0; i < nprobes; ++i)
      cfg.probes.push_back((std::int64_t(i) * 2 + 1) * total / (2 * nprobes));
  }
  cfg.record_norms = map.get_bool("run.record_norms", cfg.cutoff.enabled);
  cfg.track_stochastic_convolution =
      map.get_bool("run.track_stochastic_convolution", false);

  cfg.u0 = build_initial_field(map, cfg.modes, cfg.dim, cfg.seed);
  return cfg;
}

}  // namespace chac
