// acceptance <criterion>
//
// Prints one PASS or FAIL line for the named criterion and exits nonzero on FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "tspde/cli/config.hpp"
#include "tspde/cli/runner.hpp"
#include "tspde/estimators.hpp"
#include "tspde/gaussian_oracle.hpp"
#include "tspde/integrators.hpp"
#include "tspde/noise.hpp"
#include "tspde/spectral.hpp"

namespace {

using namespace tspde;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

unsigned all_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

SchemeConfig scheme(std::size_t J, std::size_t M, double dt, std::size_t steps) {
  SchemeConfig c;
  c.modes = J;
  c.nodes = M;
  c.dt = dt;
  c.steps = steps;
  c.x0 = SpectralField(J);
  return c;
}

Outcome transform_exactness() {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (std::size_t J : {4u, 16u, 64u})
    for (int f = 0; f < 100; ++f) {
      std::vector<double> a(J);
      for (double& v : a) v = normal(gen);
      const SpectralField back = analyze(synthesize(SpectralField(a), 4 * J), J);
      for (std::size_t n = 0; n < J; ++n) worst = std::max(worst, std::abs(back[n] - a[n]));
    }
  return {worst <= 1e-12, fmt("max |analyze(synthesize(a)) - a| = %.3g (tol 1e-12)", worst)};
}

Outcome convolution_weak_order() {
  std::vector<double> dts;
  for (int k = 3; k <= 9; ++k) dts.push_back(std::ldexp(1.0, -k));
  auto slope = [&](const CovarianceSpec& cov) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : convolution_weak_error_curve(cov, 128, 1.0, dts)) pts.emplace_back(p.dt, p.error);
    return fit_rate(pts).slope;
  };
  const double white = slope(CovarianceSpec::white());
  const double trace = slope(CovarianceSpec::power_decay(3.0));
  const bool ok = std::abs(white - 0.5) <= 0.1 && std::abs(trace - 1.0) <= 0.15;
  return {ok, fmt("slope white %.4f (0.5 +- 0.1), power_decay(3) %.4f (1.0 +- 0.15)", white, trace)};
}

Outcome gaussian_oracle_equivalence() {
  SchemeConfig c = scheme(16, 64, 0.05, 100);
  c.taming = false;
  c.nl = Nonlinearity::linear(1.0);
  c.x0 = SpectralField::unit(16, 1);
  const ModeStatistics st = mode_statistics(c, 10000, all_workers());
  const ModeGaussian g = linear_scheme_law(1.0, c, 100);
  if (st.mean.empty()) return {false, "no surviving paths"};
  int bad = 0;
  double worst = 0.0;
  for (std::size_t j = 0; j < 16; ++j) {
    const double zm = std::abs(st.mean[j].value - g.mean[j]) / st.mean[j].std_error;
    const double zv = std::abs(st.variance[j].value - g.variance[j]) / st.variance[j].std_error;
    worst = std::max({worst, zm, zv});
    if (zm > 3.0 || zv > 3.0) ++bad;
  }
  return {bad == 0, fmt("%d of 32 mean/variance entries outside 3 SE, largest |z| = %.2f", bad, worst)};
}

Outcome zero_drift_reduction() {
  SchemeConfig c = scheme(32, 128, 0.01, 100);
  c.nl = Nonlinearity::zero();
  c.x0 = SpectralField::unit(32, 1, 0.7);
  std::size_t mismatches = 0;
  for (std::uint32_t p = 0; p < 20; ++p) {
    SpectralField x = c.x0, z = c.x0;
    for (std::size_t n = 0; n < c.steps; ++n) {
      const NoiseStream s{c.seed, p, n};
      x = tamed_step(x, c, s);
      z = step_discrete_convolution(z, sample_increment(c.cov, c.dt, c.modes, s), c.dt);
      if (!(x == z)) ++mismatches;
    }
    if (!(simulate(c, p).final_state == z)) ++mismatches;
  }
  return {mismatches == 0, fmt("%zu bitwise mismatches over 20 paths x 100 steps", mismatches)};
}

Outcome taming_invariant() {
  SchemeConfig c = scheme(64, 256, 0.1, 100);
  c.x0 = SpectralField::unit(64, 1, 5.0);
  auto op = std::make_shared<const StepOperator>(c);
  const auto per_path = parallel_map(1000, all_workers(), [&](std::size_t p) {
    Stepper st(op, c.nl);
    StreamNoise noise(c.seed, static_cast<std::uint32_t>(p), c.modes);
    std::vector<double> x = c.x0.coeffs, dw(c.modes);
    double worst = 0.0;
    bool finite = true;
    try {
      for (std::size_t n = 0; n < c.steps; ++n) {
        noise.fill(st, n, dw);
        worst = std::max(worst, st.step(x, dw, true, n).drift_contribution);
      }
    } catch (const OverflowError&) {
      finite = false;
    }
    return std::pair{worst, finite && all_finite(x)};
  });
  double worst = 0.0;
  std::size_t overflow = 0;
  for (const auto& [w, ok] : per_path) {
    worst = std::max(worst, w);
    if (!ok) ++overflow;
  }
  return {worst < 1.0 && overflow == 0,
          fmt("max tamed drift contribution %.6f (< 1), %zu overflowing paths of 1000", worst, overflow)};
}

Outcome blowup_contrast() {
  SchemeConfig c = scheme(16, 64, 0.25, 200);
  c.taming = false;
  c.nl = Nonlinearity::polynomial({0, 0, 0, -1});
  c.x0 = SpectralField::unit(16, 1, 10.0);
  const ModeStatistics st = mode_statistics(c, 100, all_workers());
  std::size_t latest = 0;
  for (std::size_t s : st.blowup_steps) latest = std::max(latest, s);
  const double frac = st.blowup_fraction();
  return {frac >= 0.9, fmt("%.0f%% of 100 paths blew up (>= 90%%), latest blowup_step %zu <= 200", 100 * frac, latest)};
}

Outcome contraction() {
  SchemeConfig c = scheme(64, 256, 0.01, 500);
  c.nl = Nonlinearity::dissipative_cubic(1.0);
  const ContractionResult r =
      contraction_rate(c, SpectralField::unit(64, 1, 1.0), SpectralField::unit(64, 1, -1.0), 200, all_workers());
  const bool ok = r.gamma.value >= 1.0 && r.relative_ci_width < 0.1;
  return {ok, fmt("gamma_hat %.4f (>= 1), 95%% CI [%.4f, %.4f], relative width %.4f (< 0.1)", r.gamma.value, r.ci_low,
                  r.ci_high, r.relative_ci_width)};
}

Outcome ergodic_consistency() {
  SchemeConfig c = scheme(64, 256, 0.02, 2500);
  c.nl = Nonlinearity::linear(1.0);
  c.noise = NoiseForm::exact;
  const double target = linear_invariant_second_moment(1.0, c.cov, c.modes);
  const ErgodicResult r = ergodic_average(c, TestFunctional::sq_norm(), 10.0, 1000, all_workers());
  const double tol_e = 3.0 * r.ensemble.std_error + 0.05 * target;
  const double tol_t = 3.0 * r.time_avg.std_error + 0.05 * target;
  const bool ok = std::abs(r.ensemble.value - target) <= tol_e && std::abs(r.time_avg.value - target) <= tol_t;
  return {ok, fmt("target %.6f, ensemble %.6f (tol %.2g), time average %.6f (tol %.2g)", target, r.ensemble.value,
                  tol_e, r.time_avg.value, tol_t)};
}

Outcome nonlinear_weak_order() {
  SchemeConfig c = scheme(64, 256, 0.25, 4);
  c.nl = Nonlinearity::dissipative_cubic(1.0);
  c.cov = CovarianceSpec::power_decay(3.0);
  c.x0 = SpectralField::unit(64, 1);
  std::vector<double> dts;
  for (int k = 2; k <= 8; ++k) dts.push_back(std::ldexp(1.0, -k));
  const WeakOrderResult w = weak_order_study(c, dts, TestFunctional::exp_neg_sq_norm(), 1.0, 100000, all_workers());
  std::size_t dominated = 0;
  for (const auto& l : w.levels) dominated += l.noise_dominated;
  if (!w.fit) return {false, fmt("noise-dominated: %zu levels within 2 SE of the reference, no slope fitted", dominated)};
  const bool ok = w.fit->slope >= 0.8 && w.fit->slope <= 1.2;
  return {ok, fmt("slope %.4f in [0.8, 1.2] (r2 %.4f, %zu levels fitted, %zu noise-dominated excluded)", w.fit->slope,
                  w.fit->r_squared, w.fit->points.size(), dominated)};
}

Outcome cost_curve_shape() {
  const double abar = alpha_bar(CovarianceSpec::white()).value;
  std::vector<double> eps;
  for (int k = 4; k <= 20; ++k) eps.push_back(std::ldexp(1.0, -k));
  const auto rows = cost_curve(0.2, abar, 27.0, eps);
  const double ratio = cost_bound_ratio(rows);
  return {ratio < 10.0, fmt("max/min of N(eps) eps^(1/alpha) = %.3g over k = 4..20 (< 10), alpha_bar %.3g", ratio, abar)};
}

Outcome determinism() {
  const std::map<std::string, std::string> runs{
      {"simulate",
       "experiment = simulate\n"
       "[model]\nnonlinearity = linear\ncovariance = white\nJ = 16\nM = 64\nx0 = mode1\ntaming = false\n"
       "[discretization]\ndt = 0.05\nN = 100\n[sampling]\nn_paths = 10000\n"},
      {"contraction",
       "experiment = contraction\n"
       "[model]\nnonlinearity = cubic\ncovariance = white\nx0 = mode1\n"
       "[discretization]\ndt = 0.01\nT = 5\n[sampling]\nn_paths = 200\n"},
      {"ergodic",
       "experiment = ergodic\n"
       "[model]\nnonlinearity = linear\ncovariance = white\nnoise = exact\n"
       "[discretization]\ndt = 0.02\nT = 50\n[sampling]\nn_paths = 1000\n[study]\nburn_in = 10\nfunctional = sq_norm\n"},
  };
  std::string detail;
  bool ok = true;
  for (const auto& [name, text] : runs) {
    cli::Overrides one, three;
    one.workers = 1;
    three.workers = 3;
    const std::string a = cli::run_experiment(cli::parse_config_text(text, one)).csv;
    const std::string b = cli::run_experiment(cli::parse_config_text(text, three)).csv;
    const bool same = a == b && !a.empty();
    ok = ok && same;
    detail += name + (same ? " identical" : " DIFFERS") + fmt(" (%zu bytes); ", a.size());
  }
  detail.resize(detail.size() - 2);
  return {ok, "workers 1 vs 3: " + detail};
}

struct Criterion {
  std::function<Outcome()> run;
  double budget_s;  // 0: no runtime bound
};

const std::map<std::string, Criterion>& criteria() {
  static const std::map<std::string, Criterion> m{
      {"transform_exactness", {transform_exactness, 1}},
      {"convolution_weak_order", {convolution_weak_order, 1}},
      {"gaussian_oracle_equivalence", {gaussian_oracle_equivalence, 60}},
      {"zero_drift_reduction", {zero_drift_reduction, 1}},
      {"taming_invariant", {taming_invariant, 60}},
      {"blowup_contrast", {blowup_contrast, 10}},
      {"contraction", {contraction, 60}},
      {"ergodic_consistency", {ergodic_consistency, 120}},
      {"nonlinear_weak_order", {nonlinear_weak_order, 1800}},
      {"cost_curve_shape", {cost_curve_shape, 1}},
      {"determinism", {determinism, 0}},
  };
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2 || !criteria().count(argv[1])) {
    std::fprintf(stderr, "usage: acceptance <criterion>\n");
    for (const auto& [name, c] : criteria()) std::fprintf(stderr, "  %s\n", name.c_str());
    return 2;
  }
  const std::string name = argv[1];
  const Criterion& c = criteria().at(name);
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string timing = fmt("%.2fs", secs);
  if (c.budget_s > 0) {
    timing += fmt(" (budget %.0fs)", c.budget_s);
    if (secs > c.budget_s) {
      o.pass = false;
      timing += " OVER BUDGET";
    }
  }
  std::printf("%s %s: %s; %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), timing.c_str());
  return o.pass ? 0 : 1;
}
