#pragma once

// Experiment configuration: INI-style text file with sections, flag
// overrides, validation, and the fully resolved key/value form that is
// embedded in run manifests.
//
//   experiment = weak-order
//   [model]
//   nonlinearity = cubic
//   covariance = power
//   beta = 3
//   [discretization]
//   dt_list = 0.25, 0.125, 0.0625
//   T = 1
//   ...

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "json.hpp"
#include "tspde/errors.hpp"
#include "tspde/estimators.hpp"
#include "tspde/integrators.hpp"
#include "tspde/noise.hpp"
#include "tspde/nonlinearity.hpp"

namespace tspde::cli {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"simulate", "moment-growth", "weak-order", "ergodic",
                                              "contraction", "cost-curve", "audit"};
  return names;
}

/// section -> key -> raw value. The root section is "".
using KeyValues = std::map<std::string, std::map<std::string, std::string>>;

struct ExperimentConfig {
  std::string experiment;

  // [model]
  std::string nonlinearity = "cubic";
  double nonlinearity_param = 1.0;
  std::vector<double> polynomial;
  std::string covariance = "white";
  double beta = 3.0;
  std::vector<double> weights;
  std::string x0 = "mode1";
  double x0_amplitude = 1.0;
  std::size_t modes = 64;
  std::size_t nodes = 256;
  bool taming = true;
  NoiseForm noise = NoiseForm::discretized;

  // [discretization]
  double dt = 0.01;
  std::vector<double> dt_list;
  double horizon = 1.0;
  std::size_t steps = 100;
  double dt_cap = kDefaultDtCap;

  // [sampling]
  std::size_t n_paths = 100;
  std::uint64_t seed = 0;
  unsigned workers = 1;

  // [output]
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv", "json", "gnuplot"};

  // [study]
  int moment_order = 2;
  NormKind norm = NormKind::l2;
  std::vector<double> checkpoints;
  std::string functional = "exp_neg_sq_norm";
  double burn_in = 0.0;
  std::string x0_b = "mode1";
  double x0_b_amplitude = -1.0;
  double alpha = 0.2;
  double q_exp = 27.0;
  int eps_k_min = 4;
  int eps_k_max = 20;
  double cost_constant = 1.0;
  double z_min = -10.0;
  double z_max = 10.0;
  std::size_t audit_samples = 2001;

  std::vector<std::string> warnings;
  /// Every key with its resolved value; replaying it reproduces the run.
  KeyValues resolved;

  bool wants(const std::string& format) const {
    return std::find(formats.begin(), formats.end(), format) != formats.end();
  }
};

namespace detail {

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string field_name(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

// Known keys per section.
inline const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"", {"experiment"}},
      {"model",
       {"nonlinearity", "nonlinearity_param", "polynomial", "covariance", "beta", "weights", "x0", "x0_amplitude", "J",
        "M", "taming", "noise"}},
      {"discretization", {"dt", "dt_list", "T", "N", "dt_cap"}},
      {"sampling", {"n_paths", "seed", "workers"}},
      {"output", {"directory", "formats"}},
      {"study",
       {"moment_order", "norm", "checkpoints", "functional", "burn_in", "x0_b", "x0_b_amplitude", "alpha", "q_exp",
        "eps_k_min", "eps_k_max", "cost_constant", "z_min", "z_max", "samples"}},
  };
  return s;
}

class Reader {
 public:
  explicit Reader(const KeyValues& kv) : kv_(kv) {}

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    auto s = kv_.find(section);
    if (s == kv_.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
  }

  bool has(const std::string& section, const std::string& key) const { return raw(section, key).has_value(); }

  std::string str(const std::string& section, const std::string& key, const std::string& def) const {
    return raw(section, key).value_or(def);
  }

  double real(const std::string& section, const std::string& key, double def) const {
    const auto r = raw(section, key);
    if (!r) return def;
    return parse_real(*r, field_name(section, key));
  }

  long long integer(const std::string& section, const std::string& key, long long def) const {
    const auto r = raw(section, key);
    if (!r) return def;
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(*r, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != r->size())
      throw ConfigError(field_name(section, key) + ": expected an integer, got '" + *r + "'");
    return v;
  }

  bool boolean(const std::string& section, const std::string& key, bool def) const {
    const auto r = raw(section, key);
    if (!r) return def;
    if (*r == "true" || *r == "1" || *r == "yes" || *r == "on") return true;
    if (*r == "false" || *r == "0" || *r == "no" || *r == "off") return false;
    throw ConfigError(field_name(section, key) + ": expected a boolean, got '" + *r + "'");
  }

  std::vector<double> reals(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    const auto r = raw(section, key);
    if (!r) return out;
    std::stringstream ss(*r);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(parse_real(item, field_name(section, key)));
    }
    return out;
  }

  std::vector<std::string> words(const std::string& section, const std::string& key,
                                 std::vector<std::string> def) const {
    const auto r = raw(section, key);
    if (!r) return def;
    std::vector<std::string> out;
    std::stringstream ss(*r);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  static double parse_real(const std::string& text, const std::string& field) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != text.size() || !std::isfinite(v))
      throw ConfigError(field + ": expected a finite number, got '" + text + "'");
    return v;
  }

 private:
  const KeyValues& kv_;
};

// Shortest text that reads back to the same double.
inline std::string fmt_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string join_reals(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt_real(v[i]);
  return s;
}

inline std::string join_words(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
  return s;
}

inline bool is_multiple(double t, double dt) {
  const double r = t / dt;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r) && std::round(r) >= 1.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Model construction from the validated configuration

inline Nonlinearity make_nonlinearity(const ExperimentConfig& c) {
  if (c.nonlinearity == "zero") return Nonlinearity::zero();
  if (c.nonlinearity == "linear") return Nonlinearity::linear(c.nonlinearity_param);
  if (c.nonlinearity == "cubic") return Nonlinearity::dissipative_cubic(c.nonlinearity_param);
  if (c.nonlinearity == "allen-cahn") return Nonlinearity::allen_cahn(c.nonlinearity_param);
  if (c.nonlinearity == "polynomial") return Nonlinearity::polynomial(c.polynomial);
  throw ConfigError("model.nonlinearity: unknown built-in '" + c.nonlinearity +
                    "' (zero, linear, cubic, allen-cahn, polynomial)");
}

inline CovarianceSpec make_covariance(const ExperimentConfig& c) {
  if (c.covariance == "white") return CovarianceSpec::white();
  if (c.covariance == "power") return CovarianceSpec::power_decay(c.beta);
  if (c.covariance == "explicit") return CovarianceSpec::explicit_list(c.weights);
  throw ConfigError("model.covariance: unknown kind '" + c.covariance + "' (white, power, explicit)");
}

/// Built-in initial conditions projected on J modes (M nodes for the bump).
inline SpectralField make_initial(const std::string& kind, double amplitude, std::size_t modes, std::size_t nodes) {
  SpectralField x(modes);
  if (kind == "zero") return x;
  if (kind == "mode1") {
    x[0] = amplitude;
    return x;
  }
  if (kind == "multimode") {
    // amplitude * sum_{n<=4} e_n / n
    for (std::size_t n = 1; n <= std::min<std::size_t>(4, modes); ++n) x[n - 1] = amplitude / static_cast<double>(n);
    return x;
  }
  if (kind == "bump") {
    // smooth compactly supported bump on (1/4, 3/4), peak value `amplitude`
    GridField g(nodes);
    for (std::size_t k = 1; k <= nodes; ++k) {
      const double s = (node_position(k, nodes) - 0.5) / 0.25;
      g.values[k - 1] = std::abs(s) < 1.0 ? amplitude * std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0;
    }
    return analyze(g, modes);
  }
  throw ConfigError("initial condition: unknown built-in '" + kind + "' (zero, mode1, multimode, bump)");
}

inline SchemeConfig make_scheme(const ExperimentConfig& c) {
  SchemeConfig s;
  s.dt = c.dt;
  s.steps = c.steps;
  s.modes = c.modes;
  s.nodes = c.nodes;
  s.taming = c.taming;
  s.noise = c.noise;
  s.cov = make_covariance(c);
  s.nl = make_nonlinearity(c);
  s.x0 = make_initial(c.x0, c.x0_amplitude, c.modes, c.nodes);
  s.seed = c.seed;
  s.dt_cap = c.dt_cap;
  return s;
}

// ---------------------------------------------------------------------------
// Parsing

/// Flatten a property tree (root keys plus one level of sections).
inline KeyValues flatten(const boost::property_tree::ptree& tree) {
  KeyValues kv;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      kv[""][name] = detail::trim(node.data());
    } else {
      for (const auto& [key, leaf] : node) {
        if (!leaf.empty()) throw ConfigError("section [" + name + "] nests too deeply at '" + key + "'");
        kv[name][key] = detail::trim(leaf.data());
      }
    }
  }
  return kv;
}

/// Reads an INI-style configuration, or the "config" object of a run
/// manifest when the path ends in .json.
inline KeyValues read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    nlohmann::json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw ConfigError("manifest '" + path + "': " + e.what());
    }
    if (!j.contains("config") || !j["config"].is_object()) throw ConfigError("manifest '" + path + "' has no config object");
    KeyValues kv;
    for (const auto& [section, body] : j["config"].items()) {
      if (section == "experiment") {
        kv[""]["experiment"] = body.get<std::string>();
        continue;
      }
      for (const auto& [key, value] : body.items()) kv[section][key] = value.get<std::string>();
    }
    return kv;
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("configuration '" + path + "': " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return flatten(tree);
}

/// Apply "section.key=value" overrides (root keys have no dot).
inline void apply_override(KeyValues& kv, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
  const std::string path = detail::trim(assignment.substr(0, eq));
  const std::string value = detail::trim(assignment.substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos)
    kv[""][path] = value;
  else
    kv[path.substr(0, dot)][path.substr(dot + 1)] = value;
}

/// Validate every field, resolve defaults, and record the resolved form.
inline ExperimentConfig resolve(const KeyValues& kv) {
  for (const auto& [section, keys] : kv) {
    const auto s = detail::schema().find(section);
    if (s == detail::schema().end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, value] : keys)
      if (!s->second.count(key)) throw ConfigError("unknown key '" + detail::field_name(section, key) + "'");
  }
  const detail::Reader r(kv);
  ExperimentConfig c;

  if (!r.has("", "experiment")) throw ConfigError("missing required field 'experiment'");
  c.experiment = r.str("", "experiment", "");
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    throw ConfigError("experiment: unknown experiment '" + c.experiment + "'");
  const std::string& e = c.experiment;
  if (!r.has("model", "nonlinearity"))
    throw ConfigError("missing required field 'model.nonlinearity'");
  if (!r.has("model", "covariance")) throw ConfigError("missing required field 'model.covariance'");

  // model
  c.nonlinearity = r.str("model", "nonlinearity", c.nonlinearity);
  c.nonlinearity_param = r.real("model", "nonlinearity_param", 1.0);
  c.polynomial = r.reals("model", "polynomial");
  if (c.nonlinearity == "polynomial" && c.polynomial.empty())
    throw ConfigError("model.polynomial: coefficient list required for nonlinearity = polynomial");
  c.covariance = r.str("model", "covariance", c.covariance);
  c.beta = r.real("model", "beta", c.beta);
  c.weights = r.reals("model", "weights");
  const long long J = r.integer("model", "J", 64);
  if (J < 1) throw ConfigError("model.J: must be >= 1");
  c.modes = static_cast<std::size_t>(J);
  const long long M = r.integer("model", "M", 4 * J);
  if (M < J) throw ConfigError("model.M: must be >= model.J (M=" + std::to_string(M) + ", J=" + std::to_string(J) + ")");
  c.nodes = static_cast<std::size_t>(M);
  c.x0 = r.str("model", "x0", c.x0);
  c.x0_amplitude = r.real("model", "x0_amplitude", c.x0_amplitude);
  c.taming = r.boolean("model", "taming", true);
  const std::string noise = r.str("model", "noise", "discretized");
  if (noise == "discretized")
    c.noise = NoiseForm::discretized;
  else if (noise == "exact")
    c.noise = NoiseForm::exact;
  else
    throw ConfigError("model.noise: expected 'discretized' or 'exact', got '" + noise + "'");

  // discretization
  c.dt_cap = r.real("discretization", "dt_cap", kDefaultDtCap);
  if (!(c.dt_cap > 0.0)) throw ConfigError("discretization.dt_cap: must be > 0");
  c.dt = r.real("discretization", "dt", 0.01);
  if (!(c.dt > 0.0)) throw ConfigError("discretization.dt: must be > 0");
  if (c.dt > c.dt_cap)
    throw ConfigError("discretization.dt: " + detail::fmt_real(c.dt) + " exceeds dt_cap (Delta t_0) = " +
                      detail::fmt_real(c.dt_cap));
  c.dt_list = r.reals("discretization", "dt_list");
  if (e == "weak-order" && c.dt_list.empty())
    for (int k = 2; k <= 8; ++k) c.dt_list.push_back(std::ldexp(1.0, -k));
  for (double d : c.dt_list) {
    if (!(d > 0.0)) throw ConfigError("discretization.dt_list: entries must be > 0");
    if (d > c.dt_cap)
      throw ConfigError("discretization.dt_list: " + detail::fmt_real(d) + " exceeds dt_cap (Delta t_0) = " +
                        detail::fmt_real(c.dt_cap));
  }

  // study (read before T so checkpoint defaults can set the horizon)
  c.moment_order = static_cast<int>(r.integer("study", "moment_order", 2));
  if (c.moment_order < 1) throw ConfigError("study.moment_order: must be >= 1");
  const std::string norm = r.str("study", "norm", "l2");
  if (norm == "l2")
    c.norm = NormKind::l2;
  else if (norm == "sup")
    c.norm = NormKind::sup;
  else
    throw ConfigError("study.norm: expected 'l2' or 'sup', got '" + norm + "'");
  c.checkpoints = r.reals("study", "checkpoints");
  if (e == "moment-growth" && c.checkpoints.empty()) c.checkpoints = {10.0, 20.0, 40.0, 80.0};

  if (r.has("discretization", "N") && r.has("discretization", "T"))
    throw ConfigError("discretization: give either T or N, not both");
  if (r.has("discretization", "N")) {
    const long long N = r.integer("discretization", "N", 1);
    if (N < 1) throw ConfigError("discretization.N: must be >= 1");
    c.steps = static_cast<std::size_t>(N);
    c.horizon = c.dt * static_cast<double>(N);
  } else {
    double def_T = 1.0;
    if (e == "moment-growth") def_T = *std::max_element(c.checkpoints.begin(), c.checkpoints.end());
    if (e == "ergodic") def_T = 50.0;
    if (e == "contraction") def_T = 5.0;
    c.horizon = r.real("discretization", "T", def_T);
    if (!(c.horizon > 0.0)) throw ConfigError("discretization.T: must be > 0");
    if (e != "weak-order" && e != "cost-curve" && e != "audit" && !detail::is_multiple(c.horizon, c.dt))
      throw ConfigError("discretization.T: " + detail::fmt_real(c.horizon) + " is not a multiple of dt");
    c.steps = static_cast<std::size_t>(std::llround(c.horizon / c.dt));
  }
  if (e == "weak-order")
    for (double d : c.dt_list)
      if (!detail::is_multiple(c.horizon, d))
        throw ConfigError("discretization.dt_list: T is not a multiple of dt=" + detail::fmt_real(d));
  for (double t : c.checkpoints)
    if (!(t >= 0.0) || t > c.horizon * (1 + 1e-12) || (t > 0.0 && !detail::is_multiple(t, c.dt)))
      throw ConfigError("study.checkpoints: " + detail::fmt_real(t) + " is not a grid time in [0, T]");

  // sampling
  const long long paths = r.integer("sampling", "n_paths", 100);
  if (paths < 2) throw ConfigError("sampling.n_paths: must be >= 2");
  c.n_paths = static_cast<std::size_t>(paths);
  const long long seed = r.integer("sampling", "seed", 0);
  if (seed < 0) throw ConfigError("sampling.seed: must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);
  const long long workers = r.integer("sampling", "workers", 1);
  if (workers < 1) throw ConfigError("sampling.workers: must be >= 1");
  c.workers = static_cast<unsigned>(workers);

  // output
  c.out_dir = r.str("output", "directory", "out");
  c.formats = r.words("output", "formats", {"csv", "json", "gnuplot"});
  for (const auto& f : c.formats)
    if (f != "csv" && f != "json" && f != "gnuplot") throw ConfigError("output.formats: unknown format '" + f + "'");

  // remaining study keys
  c.functional = r.str("study", "functional", e == "ergodic" ? "sq_norm" : "exp_neg_sq_norm");
  (void)TestFunctional::by_name(c.functional);
  c.burn_in = r.real("study", "burn_in", e == "ergodic" ? c.horizon / 5.0 : 0.0);
  if (e == "ergodic" && !(c.burn_in >= 0.0 && c.burn_in < c.horizon))
    throw ConfigError("study.burn_in: must lie in [0, T)");
  c.x0_b = r.str("study", "x0_b", c.x0);
  c.x0_b_amplitude = r.real("study", "x0_b_amplitude", -c.x0_amplitude);
  c.alpha = r.real("study", "alpha", 0.2);
  c.eps_k_min = static_cast<int>(r.integer("study", "eps_k_min", 4));
  c.eps_k_max = static_cast<int>(r.integer("study", "eps_k_max", 20));
  if (c.eps_k_min < 1 || c.eps_k_max < c.eps_k_min) throw ConfigError("study.eps_k_min/eps_k_max: need 1 <= min <= max");
  c.cost_constant = r.real("study", "cost_constant", 1.0);
  if (!(c.cost_constant > 0.0)) throw ConfigError("study.cost_constant: must be > 0");
  c.z_min = r.real("study", "z_min", -10.0);
  c.z_max = r.real("study", "z_max", 10.0);
  if (!(c.z_max > c.z_min)) throw ConfigError("study.z_min/z_max: need z_min < z_max");
  const long long samples = r.integer("study", "samples", 2001);
  if (samples < 2) throw ConfigError("study.samples: must be >= 2");
  c.audit_samples = static_cast<std::size_t>(samples);

  // model objects: validates names and parameters
  Nonlinearity nl;
  try {
    nl = make_nonlinearity(c);
    (void)make_covariance(c);
    (void)make_initial(c.x0, c.x0_amplitude, c.modes, c.nodes);
    (void)make_initial(c.x0_b, c.x0_b_amplitude, c.modes, c.nodes);
  } catch (const DomainError& err) {
    throw ConfigError(err.what());
  }
  c.q_exp = r.real("study", "q_exp", 3.0 * nl.growth_q * nl.growth_q);
  if (!(c.q_exp >= 0.0)) throw ConfigError("study.q_exp: must be >= 0");
  if (e == "cost-curve") {
    double abar = 0.0;
    try {
      abar = alpha_bar(make_covariance(c)).value;
    } catch (const DomainError& err) {
      throw ConfigError(std::string("study.alpha: ") + err.what());
    }
    if (!(c.alpha > 0.0 && c.alpha < abar))
      throw ConfigError("study.alpha: need 0 < alpha < alpha_bar = " + detail::fmt_real(abar));
  }
  if (e == "contraction" &&
      make_initial(c.x0, c.x0_amplitude, c.modes, c.nodes) == make_initial(c.x0_b, c.x0_b_amplitude, c.modes, c.nodes))
    throw ConfigError("study.x0_b: must differ from model.x0 for a contraction study");
  if (e == "weak-order" && c.noise != NoiseForm::discretized)
    throw ConfigError("model.noise: weak-order studies couple levels by summing increments; use 'discretized'");
  for (const auto& w : nl.warnings) c.warnings.push_back(nl.name + ": " + w);
  if (e == "weak-order" && !TestFunctional::by_name(c.functional).bounded_c2)
    c.warnings.push_back("study.functional '" + c.functional +
                         "' lacks bounded first and second order derivatives; weak rate not guaranteed");

  // resolved form
  using detail::fmt_real;
  KeyValues& o = c.resolved;
  o[""]["experiment"] = c.experiment;
  o["model"] = {{"nonlinearity", c.nonlinearity},
                {"nonlinearity_param", fmt_real(c.nonlinearity_param)},
                {"polynomial", detail::join_reals(c.polynomial)},
                {"covariance", c.covariance},
                {"beta", fmt_real(c.beta)},
                {"weights", detail::join_reals(c.weights)},
                {"x0", c.x0},
                {"x0_amplitude", fmt_real(c.x0_amplitude)},
                {"J", std::to_string(c.modes)},
                {"M", std::to_string(c.nodes)},
                {"taming", c.taming ? "true" : "false"},
                {"noise", c.noise == NoiseForm::discretized ? "discretized" : "exact"}};
  o["discretization"] = {{"dt", fmt_real(c.dt)},
                         {"dt_list", detail::join_reals(c.dt_list)},
                         {"T", fmt_real(c.horizon)},
                         {"dt_cap", fmt_real(c.dt_cap)}};
  o["sampling"] = {{"n_paths", std::to_string(c.n_paths)},
                   {"seed", std::to_string(c.seed)},
                   {"workers", std::to_string(c.workers)}};
  o["output"] = {{"directory", c.out_dir}, {"formats", detail::join_words(c.formats)}};
  o["study"] = {{"moment_order", std::to_string(c.moment_order)},
                {"norm", c.norm == NormKind::l2 ? "l2" : "sup"},
                {"checkpoints", detail::join_reals(c.checkpoints)},
                {"functional", c.functional},
                {"burn_in", fmt_real(c.burn_in)},
                {"x0_b", c.x0_b},
                {"x0_b_amplitude", fmt_real(c.x0_b_amplitude)},
                {"alpha", fmt_real(c.alpha)},
                {"q_exp", fmt_real(c.q_exp)},
                {"eps_k_min", std::to_string(c.eps_k_min)},
                {"eps_k_max", std::to_string(c.eps_k_max)},
                {"cost_constant", fmt_real(c.cost_constant)},
                {"z_min", fmt_real(c.z_min)},
                {"z_max", fmt_real(c.z_max)},
                {"samples", std::to_string(c.audit_samples)}};
  return c;
}

struct Overrides {
  std::optional<std::string> experiment;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;
  std::vector<std::string> assignments;  // section.key=value
};

/// File < environment (TSPDE_WORKERS, TSPDE_OUT) < flags.
inline ExperimentConfig parse_config(KeyValues kv, const Overrides& flags = {}, bool use_environment = true) {
  if (use_environment) {
    if (const char* w = std::getenv("TSPDE_WORKERS")) kv["sampling"]["workers"] = w;
    if (const char* d = std::getenv("TSPDE_OUT")) kv["output"]["directory"] = d;
  }
  for (const auto& a : flags.assignments) apply_override(kv, a);
  if (flags.experiment) kv[""]["experiment"] = *flags.experiment;
  if (flags.seed) kv["sampling"]["seed"] = std::to_string(*flags.seed);
  if (flags.workers) kv["sampling"]["workers"] = std::to_string(*flags.workers);
  if (flags.out_dir) kv["output"]["directory"] = *flags.out_dir;
  return resolve(kv);
}

inline ExperimentConfig parse_config(const std::string& path, const Overrides& flags = {},
                                     bool use_environment = true) {
  return parse_config(read_config_file(path), flags, use_environment);
}

/// Parse configuration text directly (INI form).
inline ExperimentConfig parse_config_text(const std::string& text, const Overrides& flags = {},
                                          bool use_environment = false) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("configuration: " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  return parse_config(flatten(tree), flags, use_environment);
}

}  // namespace tspde::cli
