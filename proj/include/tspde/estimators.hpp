#pragma once

// Monte Carlo drivers: moment growth, weak order by self-convergence,
// ergodic averages, contraction rates, and the cost schedule.
//
// All studies are path-parallel. Path i always uses trajectory index i of
// the configured seed, and reductions run in path order, so results are
// bit-for-bit independent of the worker count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "tspde/errors.hpp"
#include "tspde/gaussian_oracle.hpp"
#include "tspde/integrators.hpp"
#include "tspde/noise.hpp"
#include "tspde/parallel.hpp"
#include "tspde/spectral.hpp"

namespace tspde {

struct MCEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
};

inline MCEstimate mc_estimate(std::span<const double> samples) {
  if (samples.size() < 2) throw ConfigError("Monte Carlo estimate needs at least 2 samples");
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : samples) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n), samples.size()};
}

/// Sample variance with the large-sample standard error sqrt((m4 - s^4)/n).
inline MCEstimate variance_estimate(std::span<const double> samples) {
  if (samples.size() < 2) throw ConfigError("variance estimate needs at least 2 samples");
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  const double mean = sum / n;
  double m2 = 0.0, m4 = 0.0;
  for (double v : samples) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  const double s2 = m2 / (n - 1.0);
  m4 /= n;
  return {s2, std::sqrt(std::max(0.0, m4 - s2 * s2) / n), samples.size()};
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log dt, log error)
};

/// Least squares fit of log(error) = slope * log(dt) + intercept.
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& dt_error) {
  if (dt_error.size() < 3) throw ConfigError("rate fit needs at least 3 points");
  RateFit fit;
  for (const auto& [dt, err] : dt_error) {
    if (!(dt > 0.0) || !(err > 0.0)) throw DomainError("rate fit needs positive step sizes and errors");
    fit.points.emplace_back(std::log(dt), std::log(err));
  }
  for (std::size_t i = 0; i < fit.points.size(); ++i)
    for (std::size_t k = i + 1; k < fit.points.size(); ++k)
      if (fit.points[i].first == fit.points[k].first) throw ConfigError("rate fit: duplicate step sizes");
  const double n = static_cast<double>(fit.points.size());
  double sx = 0, sy = 0;
  for (const auto& [x, y] : fit.points) {
    sx += x;
    sy += y;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [x, y] : fit.points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (const auto& [x, y] : fit.points) {
    const double r = y - (fit.intercept + fit.slope * x);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return fit;
}

/// phi : L^2 -> R evaluated on spectral coefficients.
struct TestFunctional {
  std::string name;
  std::function<double(std::span<const double>)> eval;
  /// C^2 with bounded first and second derivatives (weak-order hypothesis).
  bool bounded_c2 = false;
  std::string note;

  double operator()(std::span<const double> x) const { return eval(x); }

  static TestFunctional exp_neg_sq_norm() {
    return {"exp_neg_sq_norm",
            [](std::span<const double> x) {
              const double n = l2_norm(x);
              return std::exp(-n * n);
            },
            true, "exp(-||x||^2); C^2 with bounded derivatives"};
  }

  static TestFunctional sigmoid_first_mode() {
    return {"sigmoid_first_mode", [](std::span<const double> x) { return std::tanh(x[0]); }, true,
            "tanh(<x, e_1>); C^2 with bounded derivatives"};
  }

  static TestFunctional sq_norm() {
    return {"sq_norm",
            [](std::span<const double> x) {
              const double n = l2_norm(x);
              return n * n;
            },
            false, "||x||^2; unbounded first derivative, admits exact oracles"};
  }

  static TestFunctional by_name(const std::string& name) {
    if (name == "exp_neg_sq_norm") return exp_neg_sq_norm();
    if (name == "sigmoid_first_mode") return sigmoid_first_mode();
    if (name == "sq_norm") return sq_norm();
    throw ConfigError("unknown test functional '" + name + "' (exp_neg_sq_norm, sigmoid_first_mode, sq_norm)");
  }
};

// ---------------------------------------------------------------------------
// Grid helpers

namespace detail {

/// Index n with n*dt == t up to rounding; throws if t is off-grid.
inline std::size_t grid_index(double t, double dt, const char* what) {
  const double r = t / dt;
  const double n = std::round(r);
  if (n < 0.0 || std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw ConfigError(std::string(what) + ": time " + std::to_string(t) + " is not a multiple of dt=" + std::to_string(dt));
  return static_cast<std::size_t>(n);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Per-mode statistics at t_N (oracle comparison for linear drift)

struct ModeStatistics {
  std::vector<MCEstimate> mean;      // empty when fewer than 2 paths survive
  std::vector<MCEstimate> variance;
  std::vector<std::size_t> blowup_steps;  // one entry per blown path, path order
  std::size_t n_paths = 0;

  double blowup_fraction() const {
    return n_paths ? static_cast<double>(blowup_steps.size()) / static_cast<double>(n_paths) : 0.0;
  }
};

/// Per-mode mean and variance of X_N over n_paths trajectories. Untamed
/// blow-ups are counted, tamed ones are fatal.
inline ModeStatistics mode_statistics(const SchemeConfig& cfg, std::size_t n_paths, unsigned workers = 1) {
  cfg.validate();
  if (n_paths < 2) throw ConfigError("n_paths must be >= 2");
  auto op = std::make_shared<const StepOperator>(cfg);
  const auto finals = parallel_map(n_paths, workers, [&](std::size_t p) {
    TrajectoryRecord r = simulate(cfg, static_cast<std::uint32_t>(p), op);
    if (r.blowup_step && cfg.taming) throw NumericFailure(p, *r.blowup_step);
    return std::pair{r.blowup_step, r.blowup_step ? std::vector<double>{} : std::move(r.final_state.coeffs)};
  });
  ModeStatistics s;
  s.n_paths = n_paths;
  std::vector<std::vector<double>> by_mode(cfg.modes);
  for (const auto& [blow, f] : finals) {
    if (blow) {
      s.blowup_steps.push_back(*blow);
      continue;
    }
    for (std::size_t j = 0; j < cfg.modes; ++j) by_mode[j].push_back(f[j]);
  }
  if (n_paths - s.blowup_steps.size() < 2) return s;
  for (std::size_t j = 0; j < cfg.modes; ++j) {
    s.mean.push_back(mc_estimate(by_mode[j]));
    s.variance.push_back(variance_estimate(by_mode[j]));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Moments

enum class NormKind { l2, sup };

struct MomentPoint {
  double t = 0.0;
  MCEstimate moment;  // (E||X_n||^m)^{1/m}
};

struct MomentStudy {
  int order = 2;
  NormKind norm = NormKind::l2;
  std::vector<MomentPoint> points;  // empty when any untamed path blew up
  double blowup_fraction = 0.0;
  std::size_t n_paths = 0;
};

inline MomentStudy estimate_moment(const SchemeConfig& cfg, int m, NormKind norm, const std::vector<double>& checkpoints,
                                   std::size_t n_paths, unsigned workers = 1) {
  cfg.validate();
  if (m < 1) throw ConfigError("moment order must be >= 1");
  if (n_paths < 2) throw ConfigError("n_paths must be >= 2");
  if (checkpoints.empty()) throw ConfigError("moment study needs at least one checkpoint");
  std::vector<std::size_t> idx;
  for (double t : checkpoints) {
    const std::size_t n = detail::grid_index(t, cfg.dt, "checkpoint");
    if (n > cfg.steps) throw ConfigError("checkpoint " + std::to_string(t) + " lies beyond the horizon");
    idx.push_back(n);
  }
  auto op = std::make_shared<const StepOperator>(cfg);
  const auto per_path = parallel_map(n_paths, workers, [&](std::size_t p) {
    TrajectoryRecord r = simulate(cfg, static_cast<std::uint32_t>(p), op);
    if (r.blowup_step) {
      if (cfg.taming) throw NumericFailure(p, *r.blowup_step);
      return std::vector<double>{};
    }
    std::vector<double> v;
    for (std::size_t n : idx) v.push_back(std::pow(norm == NormKind::l2 ? r.l2_norms[n] : r.sup_norms[n], m));
    return v;
  });
  MomentStudy study;
  study.order = m;
  study.norm = norm;
  study.n_paths = n_paths;
  std::size_t blown = 0;
  for (const auto& v : per_path) blown += v.empty() ? 1 : 0;
  study.blowup_fraction = static_cast<double>(blown) / static_cast<double>(n_paths);
  if (blown > 0) return study;
  for (std::size_t c = 0; c < idx.size(); ++c) {
    std::vector<double> samples(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) samples[p] = per_path[p][c];
    const MCEstimate raw = mc_estimate(samples);
    const double inv = 1.0 / static_cast<double>(m);
    MCEstimate root{std::pow(raw.value, inv), 0.0, raw.n_samples};
    if (raw.value > 0.0) root.std_error = inv * std::pow(raw.value, inv - 1.0) * raw.std_error;
    study.points.push_back({checkpoints[c], root});
  }
  return study;
}

/// Shape of moment growth in T: both a log-log fit against (1+T) and a
/// semilog fit, plus the check v(T) <= C (1+T)^q with C fixed at the first
/// checkpoint (3 standard errors of slack).
struct GrowthProfile {
  double loglog_slope = 0.0;
  double loglog_r2 = 0.0;
  double semilog_rate = 0.0;
  double semilog_r2 = 0.0;
  double constant = 0.0;
  bool polynomially_bounded = false;
};

inline GrowthProfile growth_profile(const MomentStudy& study, double q) {
  if (study.points.size() < 2) throw ConfigError("growth profile needs at least 2 checkpoints");
  auto linfit = [](const std::vector<std::pair<double, double>>& xy, double& slope, double& r2) {
    const double n = static_cast<double>(xy.size());
    double mx = 0, my = 0;
    for (const auto& [x, y] : xy) {
      mx += x / n;
      my += y / n;
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : xy) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (y - my);
      syy += (y - my) * (y - my);
    }
    slope = sxx > 0 ? sxy / sxx : 0.0;
    r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 0.0;
  };
  std::vector<std::pair<double, double>> ll, sl;
  for (const auto& p : study.points) {
    ll.emplace_back(std::log1p(p.t), std::log(p.moment.value));
    sl.emplace_back(p.t, std::log(p.moment.value));
  }
  GrowthProfile g;
  linfit(ll, g.loglog_slope, g.loglog_r2);
  linfit(sl, g.semilog_rate, g.semilog_r2);
  const auto& first = study.points.front();
  g.constant = first.moment.value / std::pow(1.0 + first.t, q);
  g.polynomially_bounded = std::all_of(study.points.begin(), study.points.end(), [&](const MomentPoint& p) {
    return p.moment.value - 3.0 * p.moment.std_error <= g.constant * std::pow(1.0 + p.t, q);
  });
  return g;
}

// ---------------------------------------------------------------------------
// Weak order by self-convergence with coupled increments

/// Coarse increments as pairwise sums of consecutive fine increments:
/// coarse[n] = fine[2n] + fine[2n+1], mode by mode. `fine` is step-major with
/// `modes` entries per step.
inline std::vector<double> aggregate_increments(std::span<const double> fine, std::size_t modes) {
  const std::size_t steps = fine.size() / modes;
  if (steps * modes != fine.size() || steps % 2 != 0)
    throw ConfigError("aggregate_increments: need an even number of complete steps");
  std::vector<double> coarse((steps / 2) * modes);
  for (std::size_t n = 0; n < steps / 2; ++n)
    for (std::size_t j = 0; j < modes; ++j)
      coarse[n * modes + j] = fine[(2 * n) * modes + j] + fine[(2 * n + 1) * modes + j];
  return coarse;
}

struct WeakOrderLevel {
  double dt = 0.0;
  std::size_t steps = 0;
  MCEstimate estimate;       // E[phi(X_N)]
  MCEstimate error_vs_ref;   // E[phi(X_N^dt) - phi(X_N^ref)], paired
  bool reference = false;
  bool noise_dominated = false;
};

struct WeakOrderResult {
  std::vector<WeakOrderLevel> levels;  // coarsest first, reference last
  std::optional<RateFit> fit;
  std::vector<std::string> warnings;
  std::string functional;
  double horizon = 0.0;
  std::size_t n_paths = 0;
};

/// E[phi(X_N)] on each level of a dyadic dt ladder, all levels driven by the
/// same Brownian path (coarse increments are sums of finest increments).
/// Errors are measured against the finest level; levels whose error lies
/// within 2 standard errors of zero are flagged noise-dominated and left out
/// of the fit.
inline WeakOrderResult weak_order_study(const SchemeConfig& base, std::vector<double> dts, const TestFunctional& phi,
                                        double horizon, std::size_t n_paths, unsigned workers = 1) {
  if (base.noise != NoiseForm::discretized)
    throw ConfigError("weak-order study couples levels through summed increments; use the discretized noise form");
  if (dts.size() < 2) throw ConfigError("weak-order study needs at least 2 step sizes");
  if (n_paths < 2) throw ConfigError("n_paths must be >= 2");
  std::sort(dts.begin(), dts.end(), std::greater<>());
  for (std::size_t i = 0; i + 1 < dts.size(); ++i)
    if (dts[i] == dts[i + 1]) throw ConfigError("weak-order study: duplicate step sizes");
  const double dt_fine = dts.back();
  if (!(dts.front() >= 4.0 * dt_fine)) throw ConfigError("weak-order study: finest dt must be <= coarsest dt / 4");

  // level l runs with dt_fine * 2^{shift[l]}
  std::vector<std::size_t> shift;
  for (double dt : dts) {
    const double r = dt / dt_fine;
    const double lr = std::round(std::log2(r));
    if (std::abs(std::ldexp(1.0, static_cast<int>(lr)) - r) > 1e-9 * r)
      throw ConfigError("weak-order study: dt=" + std::to_string(dt) + " is not a power-of-two multiple of the finest dt");
    shift.push_back(static_cast<std::size_t>(lr));
  }
  const std::size_t fine_steps = detail::grid_index(horizon, dt_fine, "weak-order horizon");
  const std::size_t max_shift = shift.front();
  if (fine_steps == 0 || fine_steps % (std::size_t{1} << max_shift) != 0)
    throw ConfigError("weak-order study: horizon must be a multiple of every dt");

  std::vector<SchemeConfig> cfgs;
  std::vector<std::shared_ptr<const StepOperator>> ops;
  auto transform = std::make_shared<const SineTransform>(base.modes, base.nodes);
  for (std::size_t l = 0; l < dts.size(); ++l) {
    SchemeConfig c = base;
    c.dt = dt_fine * std::ldexp(1.0, static_cast<int>(shift[l]));
    c.steps = fine_steps >> shift[l];
    c.validate();
    cfgs.push_back(c);
    ops.push_back(std::make_shared<const StepOperator>(c, transform));
  }

  WeakOrderResult result;
  result.functional = phi.name;
  result.horizon = horizon;
  result.n_paths = n_paths;
  if (!phi.bounded_c2)
    result.warnings.push_back("test functional '" + phi.name +
                              "' is not C^2 with bounded first and second order derivatives; "
                              "the weak-order rate is not guaranteed for it");

  const std::size_t J = base.modes;
  const std::vector<double> fine_std = ops.back()->noise_std;
  const auto per_path = parallel_map(n_paths, workers, [&](std::size_t p) {
    std::vector<double> inc(fine_steps * J);
    NoiseStream stream{base.seed, static_cast<std::uint32_t>(p), 0};
    for (std::size_t n = 0; n < fine_steps; ++n) {
      std::span<double> row(&inc[n * J], J);
      standard_normals(stream.at_step(n), row);
      for (std::size_t j = 0; j < J; ++j) row[j] *= fine_std[j];
    }
    std::vector<double> values(dts.size());
    std::size_t level_shift = 0;
    for (std::size_t l = dts.size(); l-- > 0;) {
      while (level_shift < shift[l]) {
        inc = aggregate_increments(inc, J);
        ++level_shift;
      }
      Stepper stepper(ops[l], base.nl);
      std::vector<double> x = base.x0.coeffs;
      for (std::size_t n = 0; n < cfgs[l].steps; ++n) {
        try {
          stepper.step(x, std::span<const double>(&inc[n * J], J), base.taming, n);
        } catch (const OverflowError& e) {
          if (base.taming) throw NumericFailure(p, e.step());
          values[l] = std::numeric_limits<double>::quiet_NaN();
          break;
        }
      }
      if (!std::isnan(values[l])) values[l] = phi(x);
    }
    return values;
  });

  const std::size_t ref = dts.size() - 1;
  std::vector<std::pair<double, double>> fit_points;
  for (std::size_t l = 0; l < dts.size(); ++l) {
    std::vector<double> v(n_paths), d(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
      v[p] = per_path[p][l];
      d[p] = per_path[p][l] - per_path[p][ref];
    }
    WeakOrderLevel lev;
    lev.dt = cfgs[l].dt;
    lev.steps = cfgs[l].steps;
    lev.estimate = mc_estimate(v);
    lev.reference = l == ref;
    if (!lev.reference) {
      lev.error_vs_ref = mc_estimate(d);
      lev.noise_dominated = !(std::abs(lev.error_vs_ref.value) > 2.0 * lev.error_vs_ref.std_error);
      if (!lev.noise_dominated) fit_points.emplace_back(lev.dt, std::abs(lev.error_vs_ref.value));
    } else {
      lev.error_vs_ref = {0.0, 0.0, n_paths};
    }
    result.levels.push_back(lev);
  }
  if (fit_points.size() >= 3) {
    result.fit = fit_rate(fit_points);
  } else {
    result.warnings.push_back("noise-dominated: only " + std::to_string(fit_points.size()) +
                              " level(s) resolved above Monte Carlo noise; no rate fitted");
  }
  return result;
}

// ---------------------------------------------------------------------------
// Ergodic averages

struct ErgodicResult {
  MCEstimate ensemble;  // mean over paths of phi(X_N)
  MCEstimate time_avg;  // mean over paths of the time average of phi(X_n), t_n > burn_in
};

inline ErgodicResult ergodic_average(const SchemeConfig& cfg, const TestFunctional& phi, double burn_in,
                                     std::size_t n_paths, unsigned workers = 1) {
  cfg.validate();
  if (n_paths < 2) throw ConfigError("n_paths must be >= 2");
  if (!(burn_in >= 0.0) || !(burn_in < cfg.horizon())) throw ConfigError("burn_in must lie in [0, T)");
  auto op = std::make_shared<const StepOperator>(cfg);
  const auto per_path = parallel_map(n_paths, workers, [&](std::size_t p) {
    Stepper stepper(op, cfg.nl);
    StreamNoise noise(cfg.seed, static_cast<std::uint32_t>(p), cfg.modes);
    std::vector<double> x = cfg.x0.coeffs;
    double acc = 0.0;
    std::size_t count = 0;
    double last = 0.0;
    auto observe = [&](std::size_t n, std::span<const double> state, const Stepper&) {
      if (static_cast<double>(n) * cfg.dt > burn_in) {
        last = phi(state);
        acc += last;
        ++count;
      }
    };
    const auto blow = run_trajectory(stepper, noise, x, cfg.steps, cfg.taming, observe, [](std::size_t, const StepInfo&) {});
    if (blow) throw NumericFailure(p, *blow);
    return std::pair<double, double>{last, acc / static_cast<double>(count)};
  });
  std::vector<double> ens(n_paths), tav(n_paths);
  for (std::size_t p = 0; p < n_paths; ++p) {
    ens[p] = per_path[p].first;
    tav[p] = per_path[p].second;
  }
  return {mc_estimate(ens), mc_estimate(tav)};
}

// ---------------------------------------------------------------------------
// Contraction under synchronous coupling

struct ContractionResult {
  MCEstimate gamma;  // mean over paths of the fitted decay rate
  double ci_low = 0.0;
  double ci_high = 0.0;
  double relative_ci_width = 0.0;
  std::vector<double> per_path_rates;
  std::vector<std::size_t> window_steps;  // regression window length per path
  bool monotone = true;                   // distance non-increasing inside every window
};

/// Rate of one distance sequence d_n (at t_n = n dt): least squares slope of
/// log d_n over the leading window where d_n stays above `floor`.
inline std::pair<double, std::size_t> fit_decay_rate(std::span<const double> distance, std::span<const double> floor,
                                                     double dt) {
  std::size_t w = 0;
  while (w < distance.size() && distance[w] > floor[w]) ++w;
  if (w < 2) throw DomainError("contraction: distance reached the rounding floor before two grid points");
  double mx = 0, my = 0;
  for (std::size_t n = 0; n < w; ++n) {
    mx += static_cast<double>(n) * dt;
    my += std::log(distance[n]);
  }
  mx /= static_cast<double>(w);
  my /= static_cast<double>(w);
  double sxx = 0, sxy = 0;
  for (std::size_t n = 0; n < w; ++n) {
    const double x = static_cast<double>(n) * dt - mx;
    sxx += x * x;
    sxy += x * (std::log(distance[n]) - my);
  }
  return {-sxy / sxx, w};
}

inline ContractionResult contraction_rate(const SchemeConfig& cfg, const SpectralField& x0_a, const SpectralField& x0_b,
                                          std::size_t n_paths, unsigned workers = 1) {
  cfg.validate();
  if (x0_a.modes() != cfg.modes || x0_b.modes() != cfg.modes) throw ConfigError("contraction: x0 mode count mismatch");
  if (x0_a == x0_b) throw DomainError("contraction: initial conditions must differ");
  if (n_paths < 2) throw ConfigError("n_paths must be >= 2");
  auto op = std::make_shared<const StepOperator>(cfg);
  struct PathOut {
    double rate = 0.0;
    std::size_t window = 0;
    bool monotone = true;
  };
  const auto per_path = parallel_map(n_paths, workers, [&](std::size_t p) {
    Stepper sa(op, cfg.nl), sb(op, cfg.nl);
    StreamNoise noise(cfg.seed, static_cast<std::uint32_t>(p), cfg.modes);
    std::vector<double> xa = x0_a.coeffs, xb = x0_b.coeffs, dw(cfg.modes), diff(cfg.modes);
    std::vector<double> dist, floor;
    auto record = [&] {
      for (std::size_t j = 0; j < cfg.modes; ++j) diff[j] = xa[j] - xb[j];
      dist.push_back(l2_norm(diff));
      // below this the difference is dominated by rounding in the two paths
      floor.push_back(1e-10 * std::max({1.0, l2_norm(xa), l2_norm(xb)}));
    };
    record();
    for (std::size_t n = 0; n < cfg.steps; ++n) {
      noise.fill(sa, n, dw);
      try {
        sa.step(xa, dw, cfg.taming, n);
        sb.step(xb, dw, cfg.taming, n);
      } catch (const OverflowError& e) {
        throw NumericFailure(p, e.step());
      }
      record();
    }
    PathOut out;
    std::tie(out.rate, out.window) = fit_decay_rate(dist, floor, cfg.dt);
    for (std::size_t n = 1; n < out.window; ++n)
      if (dist[n] > dist[n - 1] * (1.0 + 1e-12)) out.monotone = false;
    return out;
  });
  ContractionResult r;
  for (const auto& o : per_path) {
    r.per_path_rates.push_back(o.rate);
    r.window_steps.push_back(o.window);
    r.monotone = r.monotone && o.monotone;
  }
  r.gamma = mc_estimate(r.per_path_rates);
  r.ci_low = r.gamma.value - 1.96 * r.gamma.std_error;
  r.ci_high = r.gamma.value + 1.96 * r.gamma.std_error;
  r.relative_ci_width = (r.ci_high - r.ci_low) / std::abs(r.gamma.value);
  return r;
}

// ---------------------------------------------------------------------------
// Cost schedule

struct CostRow {
  double eps = 0.0;
  double dt = 0.0;
  double steps = 0.0;   // N; kept as a real since it overflows integer types for small eps
  double scaled = 0.0;  // N * eps^{1/alpha}
};

/// Time step and step count reaching accuracy eps:
///   N dt = C |log eps|,  (N dt)^Q dt^{(alpha + alpha_bar)/2} = C eps.
/// N is rounded up and dt recomputed so that N dt = C |log eps| holds.
inline std::vector<CostRow> cost_curve(double alpha, double alpha_bar, double q_exp, const std::vector<double>& eps_list,
                                       double constant = 1.0) {
  if (!(alpha > 0.0) || !(alpha < alpha_bar))
    throw DomainError("cost_curve: need 0 < alpha < alpha_bar (alpha=" + std::to_string(alpha) +
                      ", alpha_bar=" + std::to_string(alpha_bar) + ")");
  if (!(q_exp >= 0.0)) throw DomainError("cost_curve: Q must be >= 0");
  if (!(constant > 0.0)) throw DomainError("cost_curve: constant must be > 0");
  const double s = alpha + alpha_bar;
  std::vector<CostRow> rows;
  for (double eps : eps_list) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("cost_curve: eps must lie in (0, 1)");
    const double L = std::abs(std::log(eps));
    const double horizon = constant * L;
    const double log_dt = std::log(constant) + (2.0 / s) * std::log(eps) - (2.0 * q_exp / s) * std::log(L);
    const double steps = std::ceil(horizon * std::exp(-log_dt));
    CostRow row;
    row.eps = eps;
    row.steps = steps;
    row.dt = horizon / steps;
    row.scaled = steps * std::pow(eps, 1.0 / alpha);
    rows.push_back(row);
  }
  return rows;
}

/// max/min of N(eps) eps^{1/alpha} over the rows.
inline double cost_bound_ratio(const std::vector<CostRow>& rows) {
  if (rows.empty()) throw ConfigError("cost_bound_ratio: no rows");
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : rows) {
    lo = std::min(lo, r.scaled);
    hi = std::max(hi, r.scaled);
  }
  return hi / lo;
}

}  // namespace tspde
