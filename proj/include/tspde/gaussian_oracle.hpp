#pragma once

// Closed-form laws for zero and linear drift. Every value here is
// sampling-free and computed mode by mode.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "tspde/errors.hpp"
#include "tspde/integrators.hpp"
#include "tspde/noise.hpp"
#include "tspde/spectral.hpp"

namespace tspde {

struct ModeGaussian {
  std::vector<double> mean;
  std::vector<double> variance;

  double second_moment() const {
    double s = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) s += mean[j] * mean[j] + variance[j];
    return s;
  }
};

/// E||Z(t)||^2 = sum_j q_j (1 - e^{-2 lambda_j t}) / (2 lambda_j).
inline double convolution_second_moment_exact(const CovarianceSpec& cov, std::size_t modes, double t) {
  if (!(t >= 0.0)) throw DomainError("convolution_second_moment_exact: t must be >= 0");
  double s = 0.0;
  for (std::size_t j = 1; j <= modes; ++j) s += exact_convolution_variance(cov.weight(j), eigenvalue(j), t);
  return s;
}

/// Per-mode variance of Z_n from Z_{k+1} = e^{dt A}(Z_k + dW_k), Z_0 = 0:
/// q dt e^{-2u} (1 - e^{-2un}) / (1 - e^{-2u}), u = lambda dt.
inline double discrete_convolution_mode_variance(double q, double lambda, double dt, std::size_t n) {
  if (n == 0) return 0.0;
  const double u = lambda * dt;
  return q * dt * std::exp(-2.0 * u) * std::expm1(-2.0 * u * static_cast<double>(n)) / std::expm1(-2.0 * u);
}

inline double discrete_convolution_second_moment(const CovarianceSpec& cov, std::size_t modes, double dt,
                                                 std::size_t n) {
  if (!(dt > 0.0)) throw DomainError("discrete_convolution_second_moment: dt must be > 0");
  double s = 0.0;
  for (std::size_t j = 1; j <= modes; ++j) s += discrete_convolution_mode_variance(cov.weight(j), eigenvalue(j), dt, n);
  return s;
}

struct WeakErrorPoint {
  double dt = 0.0;
  double error = 0.0;
};

/// |E||Z_n||^2 - E||Z(t_n)||^2| at t_n = t_fix for each dt. Every dt must
/// divide t_fix.
inline std::vector<WeakErrorPoint> convolution_weak_error_curve(const CovarianceSpec& cov, std::size_t modes,
                                                                double t_fix, const std::vector<double>& dts) {
  if (!(t_fix > 0.0)) throw DomainError("convolution_weak_error_curve: t_fix must be > 0");
  const double exact = convolution_second_moment_exact(cov, modes, t_fix);
  std::vector<WeakErrorPoint> out;
  out.reserve(dts.size());
  for (double dt : dts) {
    if (!(dt > 0.0)) throw ConfigError("convolution_weak_error_curve: dt must be > 0");
    const double ratio = t_fix / dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * ratio)
      throw ConfigError("convolution_weak_error_curve: dt=" + std::to_string(dt) + " does not divide t_fix");
    const double discrete = discrete_convolution_second_moment(cov, modes, dt, static_cast<std::size_t>(n));
    out.push_back({dt, std::abs(discrete - exact)});
  }
  return out;
}

/// Exact law after n steps of the untamed scheme with f(z) = -c z, started
/// from cfg.x0: m <- rho m, v <- rho^2 v + s^2, rho = e^{-lambda dt}(1 - c dt).
inline ModeGaussian linear_scheme_law(double c, const SchemeConfig& cfg, std::size_t n) {
  if (cfg.taming) throw ConfigError("linear_scheme_law: the tamed linear scheme is not Gaussian");
  if (!(c >= 0.0)) throw DomainError("linear_scheme_law: c must be >= 0");
  ModeGaussian g;
  g.mean.resize(cfg.modes);
  g.variance.resize(cfg.modes);
  const double nn = static_cast<double>(n);
  for (std::size_t j = 0; j < cfg.modes; ++j) {
    const double lambda = eigenvalue(j + 1);
    const double e = std::exp(-lambda * cfg.dt);
    const double rho = e * (1.0 - c * cfg.dt);
    const double q = cfg.cov.weight(j + 1);
    const double s2 = cfg.noise == NoiseForm::discretized ? e * e * q * cfg.dt
                                                          : exact_convolution_variance(q, lambda, cfg.dt);
    const double x0 = j < cfg.x0.modes() ? cfg.x0[j] : 0.0;
    g.mean[j] = std::pow(rho, nn) * x0;
    const double r2 = rho * rho;
    g.variance[j] = r2 == 1.0 ? nn * s2 : s2 * (1.0 - std::pow(r2, nn)) / (1.0 - r2);
  }
  return g;
}

/// n -> infinity limit of linear_scheme_law's variance.
inline std::vector<double> linear_scheme_stationary_variance(double c, const SchemeConfig& cfg) {
  std::vector<double> v(cfg.modes);
  for (std::size_t j = 0; j < cfg.modes; ++j) {
    const double lambda = eigenvalue(j + 1);
    const double e = std::exp(-lambda * cfg.dt);
    const double rho = e * (1.0 - c * cfg.dt);
    const double q = cfg.cov.weight(j + 1);
    const double s2 = cfg.noise == NoiseForm::discretized ? e * e * q * cfg.dt
                                                          : exact_convolution_variance(q, lambda, cfg.dt);
    v[j] = s2 / (1.0 - rho * rho);
  }
  return v;
}

/// Invariant law of dX = (AX - cX) dt + dW^Q: mode variance q_j / (2 (lambda_j + c)).
inline std::vector<double> linear_invariant_variance(double c, const CovarianceSpec& cov, std::size_t modes) {
  if (!(c >= 0.0)) throw DomainError("linear_invariant_variance: c must be >= 0");
  std::vector<double> v(modes);
  for (std::size_t j = 1; j <= modes; ++j) v[j - 1] = cov.weight(j) / (2.0 * (eigenvalue(j) + c));
  return v;
}

/// int ||x||^2 dmu_* for linear drift.
inline double linear_invariant_second_moment(double c, const CovarianceSpec& cov, std::size_t modes) {
  double s = 0.0;
  for (double v : linear_invariant_variance(c, cov, modes)) s += v;
  return s;
}

}  // namespace tspde
