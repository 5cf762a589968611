#pragma once

// Experiment dispatch and artifact writing.
//
// run_experiment() is pure: it returns the CSV text, the two-column plot data,
// the gnuplot script and a JSON summary. write_run() puts them on disk next to
// manifest.json.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tspde/cli/config.hpp"
#include "tspde/estimators.hpp"
#include "tspde/gaussian_oracle.hpp"
#include "tspde/noise.hpp"
#include "tspde/nonlinearity.hpp"

namespace tspde::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kCsvSchema = "tspde-csv v1";

struct RunResult {
  std::string csv;
  std::string dat;
  std::string gnuplot;
  nlohmann::ordered_json summary;
  std::optional<nlohmann::ordered_json> fit;  // weak-order only
  std::string report;                         // human-readable text for stdout
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Table {
 public:
  Table(const std::string& experiment, std::vector<std::string> columns) {
    out_ << "# " << kCsvSchema << ' ' << experiment << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
    out_ << '\n';
  }
  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ostringstream out_;
};

class Dat {
 public:
  explicit Dat(const std::string& header) { out_ << "# " << header << '\n'; }
  void add(double x, double y) { out_ << num(x) << ' ' << num(y) << '\n'; }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

inline std::string gnuplot_script(const std::string& experiment, const std::string& xlabel, const std::string& ylabel,
                                  bool logx, bool logy, const std::string& style = "linespoints") {
  std::ostringstream g;
  g << "# gnuplot script for " << experiment << ".dat\n";
  g << "set title '" << experiment << "'\n";
  g << "set xlabel '" << xlabel << "'\n";
  g << "set ylabel '" << ylabel << "'\n";
  if (logx) g << "set logscale x\n";
  if (logy) g << "set logscale y\n";
  g << "set key off\n";
  g << "plot '" << experiment << ".dat' using 1:2 with " << style << "\n";
  return g.str();
}

/// c such that f(z) = -c z, when the drift is linear or zero.
inline std::optional<double> linear_coefficient(const ExperimentConfig& c) {
  if (c.nonlinearity == "zero") return 0.0;
  if (c.nonlinearity == "linear") return c.nonlinearity_param;
  return std::nullopt;
}

inline nlohmann::ordered_json estimate_json(const MCEstimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"n_samples", e.n_samples}};
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunResult run_simulate(const ExperimentConfig& c) {
  const SchemeConfig s = make_scheme(c);
  const ModeStatistics st = mode_statistics(s, c.n_paths, c.workers);

  std::optional<ModeGaussian> oracle;
  if (const auto lin = detail::linear_coefficient(c); lin && (!s.taming || *lin == 0.0)) {
    SchemeConfig u = s;
    u.taming = false;  // with F = 0 both schemes coincide
    oracle = linear_scheme_law(*lin, u, s.steps);
  }

  RunResult r;
  detail::Table t("simulate", {"mode", "mean", "mean_se", "variance", "variance_se", "oracle_mean", "oracle_variance"});
  detail::Dat dat("mode variance");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t j = 0; j < s.modes; ++j) {
    const bool have = !st.mean.empty();
    const double om = oracle ? oracle->mean[j] : nan;
    const double ov = oracle ? oracle->variance[j] : nan;
    t.row(j + 1, have ? st.mean[j].value : nan, have ? st.mean[j].std_error : nan, have ? st.variance[j].value : nan,
          have ? st.variance[j].std_error : nan, om, ov);
    if (have) dat.add(static_cast<double>(j + 1), st.variance[j].value);
  }
  r.csv = t.str();
  r.dat = dat.str();
  r.gnuplot = detail::gnuplot_script("simulate", "mode j", "Var X_N^j", false, true);

  std::size_t within = 0;
  if (oracle && !st.mean.empty())
    for (std::size_t j = 0; j < s.modes; ++j) {
      const bool m_ok = std::abs(st.mean[j].value - oracle->mean[j]) <= 3.0 * st.mean[j].std_error;
      const bool v_ok = std::abs(st.variance[j].value - oracle->variance[j]) <= 3.0 * st.variance[j].std_error;
      within += (m_ok && v_ok) ? 1 : 0;
    }
  r.summary = {{"experiment", "simulate"},
               {"n_paths", st.n_paths},
               {"steps", s.steps},
               {"horizon", s.horizon()},
               {"blowup_fraction", st.blowup_fraction()},
               {"blowup_steps", st.blowup_steps},
               {"oracle", oracle.has_value()}};
  if (oracle) r.summary["modes_within_3se"] = within;

  std::ostringstream rep;
  rep << "simulate: " << st.n_paths << " paths, " << s.steps << " steps, blow-up fraction " << st.blowup_fraction();
  if (oracle) rep << ", " << within << "/" << s.modes << " modes within 3 SE of the Gaussian law";
  rep << '\n';
  r.report = rep.str();
  return r;
}

inline RunResult run_moment_growth(const ExperimentConfig& c) {
  const SchemeConfig s = make_scheme(c);
  const MomentStudy st = estimate_moment(s, c.moment_order, c.norm, c.checkpoints, c.n_paths, c.workers);
  RunResult r;
  detail::Table t("moment-growth", {"t", "moment", "std_error", "n_paths"});
  detail::Dat dat("t moment");
  for (const auto& p : st.points) {
    t.row(p.t, p.moment.value, p.moment.std_error, p.moment.n_samples);
    dat.add(p.t, p.moment.value);
  }
  r.csv = t.str();
  r.dat = dat.str();
  r.gnuplot = detail::gnuplot_script("moment-growth", "T", "(E||X||^m)^(1/m)", true, true);
  r.summary = {{"experiment", "moment-growth"},
               {"order", st.order},
               {"norm", st.norm == NormKind::l2 ? "l2" : "sup"},
               {"n_paths", st.n_paths},
               {"blowup_fraction", st.blowup_fraction}};
  std::ostringstream rep;
  if (st.points.size() >= 2) {
    const GrowthProfile g = growth_profile(st, s.nl.growth_q);
    r.summary["loglog_slope"] = g.loglog_slope;
    r.summary["loglog_r2"] = g.loglog_r2;
    r.summary["semilog_rate"] = g.semilog_rate;
    r.summary["semilog_r2"] = g.semilog_r2;
    r.summary["bound_exponent"] = s.nl.growth_q;
    r.summary["bound_constant"] = g.constant;
    r.summary["polynomially_bounded"] = g.polynomially_bounded;
    rep << "moment-growth: log-log slope " << g.loglog_slope << " (r2 " << g.loglog_r2 << "), semilog rate "
        << g.semilog_rate << " (r2 " << g.semilog_r2 << "), polynomially bounded: "
        << (g.polynomially_bounded ? "yes" : "no") << '\n';
  } else if (st.points.empty()) {
    rep << "moment-growth: moments lost, " << st.blowup_fraction * 100.0 << "% of untamed paths blew up\n";
  }
  r.report = rep.str();
  return r;
}

inline RunResult run_weak_order(const ExperimentConfig& c) {
  const SchemeConfig s = make_scheme(c);
  const TestFunctional phi = TestFunctional::by_name(c.functional);
  const WeakOrderResult w = weak_order_study(s, c.dt_list, phi, c.horizon, c.n_paths, c.workers);
  RunResult r;
  detail::Table t("weak-order",
                  {"dt", "estimate", "std_error", "error_vs_ref", "error_se", "noise_dominated", "reference"});
  detail::Dat dat("dt |error_vs_ref|");
  for (const auto& l : w.levels) {
    t.row(l.dt, l.estimate.value, l.estimate.std_error, l.error_vs_ref.value, l.error_vs_ref.std_error,
          l.noise_dominated, l.reference);
    if (!l.reference && !l.noise_dominated) dat.add(l.dt, std::abs(l.error_vs_ref.value));
  }
  r.csv = t.str();
  r.dat = dat.str();
  r.gnuplot = detail::gnuplot_script("weak-order", "dt", "|E phi(X^dt) - E phi(X^ref)|", true, true);
  r.warnings = w.warnings;

  nlohmann::ordered_json fit;
  if (w.fit) {
    fit = {{"slope", w.fit->slope},
           {"intercept", w.fit->intercept},
           {"r_squared", w.fit->r_squared},
           {"levels_fitted", w.fit->points.size()},
           {"noise_dominated", false}};
  } else {
    fit = {{"slope", nullptr}, {"noise_dominated", true}};
  }
  fit["functional"] = w.functional;
  fit["horizon"] = w.horizon;
  fit["n_paths"] = w.n_paths;
  r.fit = fit;
  r.summary = {{"experiment", "weak-order"}, {"fit", fit}};

  std::ostringstream rep;
  if (w.fit)
    rep << "weak-order: slope " << w.fit->slope << " (r2 " << w.fit->r_squared << ", " << w.fit->points.size()
        << " levels)\n";
  else
    rep << "weak-order: noise-dominated, no rate fitted\n";
  r.report = rep.str();
  return r;
}

inline RunResult run_ergodic(const ExperimentConfig& c) {
  const SchemeConfig s = make_scheme(c);
  const TestFunctional phi = TestFunctional::by_name(c.functional);
  const ErgodicResult e = ergodic_average(s, phi, c.burn_in, c.n_paths, c.workers);
  double target = std::numeric_limits<double>::quiet_NaN();
  if (const auto lin = detail::linear_coefficient(c); lin && c.functional == "sq_norm")
    target = linear_invariant_second_moment(*lin, s.cov, s.modes);

  RunResult r;
  detail::Table t("ergodic", {"estimator", "value", "std_error", "n_samples", "target"});
  t.row("ensemble", e.ensemble.value, e.ensemble.std_error, e.ensemble.n_samples, target);
  t.row("time_average", e.time_avg.value, e.time_avg.std_error, e.time_avg.n_samples, target);
  detail::Dat dat("estimator(1=ensemble,2=time_average) value");
  dat.add(1.0, e.ensemble.value);
  dat.add(2.0, e.time_avg.value);
  r.csv = t.str();
  r.dat = dat.str();
  r.gnuplot = detail::gnuplot_script("ergodic", "estimator", "value", false, false, "points");
  r.summary = {{"experiment", "ergodic"},
               {"functional", c.functional},
               {"burn_in", c.burn_in},
               {"ensemble", detail::estimate_json(e.ensemble)},
               {"time_average", detail::estimate_json(e.time_avg)}};
  if (!std::isnan(target)) r.summary["target"] = target;
  std::ostringstream rep;
  rep << "ergodic: ensemble " << e.ensemble.value << " +- " << e.ensemble.std_error << ", time average "
      << e.time_avg.value << " +- " << e.time_avg.std_error;
  if (!std::isnan(target)) rep << ", target " << target;
  rep << '\n';
  r.report = rep.str();
  return r;
}

inline RunResult run_contraction(const ExperimentConfig& c) {
  const SchemeConfig s = make_scheme(c);
  const SpectralField xb = make_initial(c.x0_b, c.x0_b_amplitude, c.modes, c.nodes);
  const ContractionResult k = contraction_rate(s, s.x0, xb, c.n_paths, c.workers);
  RunResult r;
  detail::Table t("contraction", {"path", "rate", "window_steps"});
  detail::Dat dat("path rate");
  for (std::size_t p = 0; p < k.per_path_rates.size(); ++p) {
    t.row(p, k.per_path_rates[p], k.window_steps[p]);
    dat.add(static_cast<double>(p), k.per_path_rates[p]);
  }
  r.csv = t.str();
  r.dat = dat.str();
  r.gnuplot = detail::gnuplot_script("contraction", "path", "fitted rate", false, false, "points");
  r.summary = {{"experiment", "contraction"},
               {"gamma", detail::estimate_json(k.gamma)},
               {"ci_low", k.ci_low},
               {"ci_high", k.ci_high},
               {"relative_ci_width", k.relative_ci_width},
               {"monotone", k.monotone}};
  if (s.nl.gamma_claim) r.summary["gamma_claim"] = *s.nl.gamma_claim;
  std::ostringstream rep;
  rep << "contraction: gamma " << k.gamma.value << " [" << k.ci_low << ", " << k.ci_high << "]\n";
  r.report = rep.str();
  return r;
}

inline RunResult run_cost_curve(const ExperimentConfig& c) {
  const double abar = alpha_bar(make_covariance(c)).value;
  std::vector<double> eps;
  for (int k = c.eps_k_min; k <= c.eps_k_max; ++k) eps.push_back(std::ldexp(1.0, -k));
  const auto rows = cost_curve(c.alpha, abar, c.q_exp, eps, c.cost_constant);
  RunResult r;
  detail::Table t("cost-curve", {"eps", "dt", "N", "scaled"});
  detail::Dat dat("eps N*eps^(1/alpha)");
  for (const auto& row : rows) {
    t.row(row.eps, row.dt, row.steps, row.scaled);
    dat.add(row.eps, row.scaled);
  }
  r.csv = t.str();
  r.dat = dat.str();
  r.gnuplot = detail::gnuplot_script("cost-curve", "eps", "N(eps) eps^(1/alpha)", true, true);
  const double ratio = cost_bound_ratio(rows);
  r.summary = {{"experiment", "cost-curve"},
               {"alpha", c.alpha},
               {"alpha_bar", abar},
               {"q_exp", c.q_exp},
               {"max_min_ratio", ratio}};
  std::ostringstream rep;
  rep << "cost-curve: max/min of N eps^(1/alpha) = " << ratio << '\n';
  r.report = rep.str();
  return r;
}

inline RunResult run_audit(const ExperimentConfig& c) {
  const Nonlinearity nl = make_nonlinearity(c);
  const CovarianceSpec cov = make_covariance(c);
  const AuditReport a = audit_assumptions(nl, c.z_min, c.z_max, c.audit_samples);
  std::optional<AlphaBar> ab;
  std::string ab_note;
  try {
    ab = alpha_bar(cov);
  } catch (const DomainError& e) {
    ab_note = e.what();
  }

  RunResult r;
  detail::Table t("audit", {"quantity", "value"});
  t.row("z_min", a.z_min);
  t.row("z_max", a.z_max);
  t.row("samples", a.samples);
  t.row("growth_q", nl.growth_q);
  t.row("growth_exponent", a.growth_exponent);
  t.row("growth_constant", a.growth_constant);
  t.row("sup_fprime", a.sup_fprime);
  t.row("lambda_1", eigenvalue(1));
  t.row("p2_ok", a.p2_ok);
  t.row("all_p_ok", a.all_p_ok);
  t.row("alpha_bar", ab ? ab->value : std::numeric_limits<double>::quiet_NaN());
  r.csv = t.str();

  detail::Dat dat("z f'(z)");
  for (std::size_t i = 0; i < a.samples; ++i) {
    const double z = c.z_min + (c.z_max - c.z_min) * static_cast<double>(i) / static_cast<double>(a.samples - 1);
    dat.add(z, nl.df(z));
  }
  r.dat = dat.str();
  r.gnuplot = detail::gnuplot_script("audit", "z", "f'(z)", false, false, "lines");

  std::string noise_class;
  if (!ab)
    noise_class = "undeterminable";
  else if (cov.kind == CovarianceSpec::Kind::white)
    noise_class = "space-time white (cylindrical)";
  else if (ab->supremum_attained)
    noise_class = "trace-class, supremum attained";
  else if (ab->borderline)
    noise_class = "borderline (supremum not attained)";
  else
    noise_class = "rough";

  r.summary = {{"experiment", "audit"},
               {"nonlinearity", nl.name},
               {"growth_q", nl.growth_q},
               {"growth_exponent", a.growth_exponent},
               {"growth_constant", a.growth_constant},
               {"sup_fprime", a.sup_fprime},
               {"p2_ok", a.p2_ok},
               {"all_p_ok", a.all_p_ok},
               {"status", a.status},
               {"covariance", cov.describe()},
               {"alpha_bar", ab ? nlohmann::ordered_json(ab->value) : nlohmann::ordered_json(nullptr)},
               {"noise_class", noise_class}};
  if (!ab_note.empty()) r.summary["alpha_bar_note"] = ab_note;

  std::ostringstream rep;
  rep << "Nonlinearity audit: " << nl.name << " on [" << a.z_min << ", " << a.z_max << "], " << a.samples
      << " samples\n";
  rep << "  polynomial growth: |f|+|f'|+|f''| <= " << a.growth_constant << " (1 + |z|^" << nl.growth_q
      << "), fitted exponent " << a.growth_exponent << '\n';
  rep << "  one-sided Lipschitz: sup f' = " << a.sup_fprime << " (lambda_1 = " << eigenvalue(1) << ")\n";
  rep << "  dissipativity: " << a.status << '\n';
  rep << "Noise: " << cov.describe() << ", alpha_bar = ";
  if (ab)
    rep << ab->value << " (" << noise_class << ")\n";
  else
    rep << "undeterminable: " << ab_note << '\n';
  r.report = rep.str();
  return r;
}

inline RunResult run_experiment(const ExperimentConfig& c) {
  RunResult r;
  if (c.experiment == "simulate")
    r = run_simulate(c);
  else if (c.experiment == "moment-growth")
    r = run_moment_growth(c);
  else if (c.experiment == "weak-order")
    r = run_weak_order(c);
  else if (c.experiment == "ergodic")
    r = run_ergodic(c);
  else if (c.experiment == "contraction")
    r = run_contraction(c);
  else if (c.experiment == "cost-curve")
    r = run_cost_curve(c);
  else if (c.experiment == "audit")
    r = run_audit(c);
  else
    throw ConfigError("experiment: unknown experiment '" + c.experiment + "'");
  std::vector<std::string> all = c.warnings;
  all.insert(all.end(), r.warnings.begin(), r.warnings.end());
  r.warnings = std::move(all);
  return r;
}

// ---------------------------------------------------------------------------
// Manifest

inline nlohmann::ordered_json resolved_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["experiment"] = c.experiment;
  for (const auto& [section, keys] : c.resolved) {
    if (section.empty()) continue;
    for (const auto& [k, v] : keys) j[section][k] = v;
  }
  return j;
}

/// FNV-1a over the resolved config, leaving out the settings that cannot
/// change results (worker count, output location).
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  auto feed = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    h ^= 0xff;
    h *= 1099511628211ull;
  };
  for (const auto& [section, keys] : c.resolved)
    for (const auto& [k, v] : keys) {
      if ((section == "sampling" && k == "workers") || (section == "output" && k == "directory")) continue;
      feed(section + "." + k + "=" + v);
    }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}

/// Runs the experiment and writes its artifacts under c.out_dir.
inline nlohmann::ordered_json write_run(const ExperimentConfig& c, RunResult* result_out = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  RunResult r = run_experiment(c);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const std::filesystem::path dir(c.out_dir);
  std::filesystem::create_directories(dir);
  std::vector<std::string> outputs;
  auto emit = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    outputs.push_back(name);
  };
  if (c.wants("csv")) emit(c.experiment + ".csv", r.csv);
  if (c.wants("gnuplot")) {
    emit(c.experiment + ".dat", r.dat);
    emit(c.experiment + ".gp", r.gnuplot);
  }
  if (c.wants("json")) {
    emit("summary.json", r.summary.dump(2) + "\n");
    if (r.fit) emit("fit.json", r.fit->dump(2) + "\n");
  }

  nlohmann::ordered_json m;
  m["tool"] = "tspde";
  m["version"] = kVersion;
  m["experiment"] = c.experiment;
  m["config_hash"] = config_hash(c);
  m["seed"] = c.seed;
  m["workers"] = c.workers;
  m["wall_time_s"] = wall;
  m["outputs"] = outputs;
  m["warnings"] = r.warnings;
  m["config"] = resolved_json(c);
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  if (result_out) *result_out = std::move(r);
  return m;
}

}  // namespace tspde::cli
