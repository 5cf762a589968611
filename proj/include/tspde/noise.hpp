#pragma once

// Q-Wiener noise diagonal in the sine basis: Q e_j = q_j e_j.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tspde/errors.hpp"
#include "tspde/philox.hpp"
#include "tspde/spectral.hpp"

namespace tspde {

struct CovarianceSpec {
  enum class Kind { white, power_decay, explicit_weights };

  Kind kind = Kind::white;
  double beta = 0.0;            // power_decay only
  std::vector<double> listed;   // explicit_weights only; modes past the list get 0

  static CovarianceSpec white() { return {}; }

  static CovarianceSpec power_decay(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("power_decay: beta must be a positive real");
    CovarianceSpec c;
    c.kind = Kind::power_decay;
    c.beta = beta;
    return c;
  }

  static CovarianceSpec explicit_list(std::vector<double> weights) {
    for (double q : weights)
      if (!(q >= 0.0) || !std::isfinite(q)) throw ConfigError("explicit covariance: weights must be finite and >= 0");
    CovarianceSpec c;
    c.kind = Kind::explicit_weights;
    c.listed = std::move(weights);
    return c;
  }

  /// q_j for 1-based j.
  double weight(std::size_t j) const {
    switch (kind) {
      case Kind::white:
        return 1.0;
      case Kind::power_decay:
        return std::pow(static_cast<double>(j), -beta);
      case Kind::explicit_weights:
        return j <= listed.size() ? listed[j - 1] : 0.0;
    }
    return 0.0;
  }

  std::vector<double> weights(std::size_t modes) const {
    std::vector<double> q(modes);
    for (std::size_t j = 1; j <= modes; ++j) q[j - 1] = weight(j);
    return q;
  }

  std::string describe() const {
    switch (kind) {
      case Kind::white:
        return "white";
      case Kind::power_decay:
        return "power_decay(beta=" + std::to_string(beta) + ")";
      case Kind::explicit_weights:
        return "explicit(" + std::to_string(listed.size()) + " weights)";
    }
    return "?";
  }
};

/// Address of one increment sequence. Increments are a pure function of
/// (seed, trajectory, step, mode).
struct NoiseStream {
  std::uint64_t seed = 0;
  std::uint32_t trajectory = 0;
  std::uint64_t step = 0;

  NoiseStream at_step(std::uint64_t s) const { return {seed, trajectory, s}; }
};

/// Fills out[j] with independent N(0,1) samples for modes j = 0..size-1.
inline void standard_normals(const NoiseStream& stream, std::span<double> out) {
  const rng::Key key{static_cast<std::uint32_t>(stream.seed), static_cast<std::uint32_t>(stream.seed >> 32)};
  const auto step_lo = static_cast<std::uint32_t>(stream.step);
  const auto step_hi = static_cast<std::uint32_t>(stream.step >> 32);
  for (std::size_t pair = 0; 2 * pair < out.size(); ++pair) {
    const rng::Counter ctr{static_cast<std::uint32_t>(pair), step_lo, step_hi, stream.trajectory};
    const auto [z0, z1] = rng::normal_pair(ctr, key);
    out[2 * pair] = z0;
    if (2 * pair + 1 < out.size()) out[2 * pair + 1] = z1;
  }
}

/// Delta W = W^Q(t_{n+1}) - W^Q(t_n): mode j ~ N(0, q_j dt).
inline SpectralField sample_increment(const CovarianceSpec& cov, double dt, std::size_t modes,
                                      const NoiseStream& stream) {
  if (!(dt > 0.0)) throw DomainError("sample_increment: dt must be > 0");
  SpectralField out(modes);
  standard_normals(stream, out.coeffs);
  for (std::size_t j = 0; j < modes; ++j) out[j] *= std::sqrt(cov.weight(j + 1) * dt);
  return out;
}

/// Z_{n+1} = e^{dt A}(Z_n + Delta W_n).
inline SpectralField step_discrete_convolution(const SpectralField& z, const SpectralField& dw, double dt) {
  if (z.modes() != dw.modes()) throw ConfigError("step_discrete_convolution: mode count mismatch");
  if (!(dt >= 0.0)) throw DomainError("step_discrete_convolution: dt must be >= 0");
  SpectralField out(z.modes());
  for (std::size_t j = 0; j < z.modes(); ++j)
    out[j] = semigroup_factor(eigenvalue(j + 1), dt) * (z[j] + dw[j]);
  return out;
}

/// Variance of int_{t}^{t+dt} e^{(t+dt-s)A} dW^Q(s) on mode j:
/// q_j (1 - e^{-2 lambda_j dt}) / (2 lambda_j).
inline double exact_convolution_variance(double q, double lambda, double dt) {
  return q * (-std::expm1(-2.0 * lambda * dt)) / (2.0 * lambda);
}

/// Z(t + dt) = e^{dt A} Z(t) + eta, sampled exactly in distribution. Uses the
/// same standard normals as sample_increment for the given stream.
inline SpectralField exact_convolution_step(const SpectralField& z, const CovarianceSpec& cov, double dt,
                                            const NoiseStream& stream) {
  if (!(dt > 0.0)) throw DomainError("exact_convolution_step: dt must be > 0");
  SpectralField eta(z.modes());
  standard_normals(stream, eta.coeffs);
  SpectralField out(z.modes());
  for (std::size_t j = 0; j < z.modes(); ++j) {
    const double lambda = eigenvalue(j + 1);
    out[j] = semigroup_factor(lambda, dt) * z[j] +
             std::sqrt(exact_convolution_variance(cov.weight(j + 1), lambda, dt)) * eta[j];
  }
  return out;
}

struct AlphaBar {
  double value = 0.0;
  /// True when the series still converges at the supremum (trace-class, beta > 1).
  bool supremum_attained = false;
  /// beta == 1: value 1/2 is the supremum but the series diverges there.
  bool borderline = false;
};

/// Noise regularity exponent: sup{alpha in (0,1/2] : sum_j q_j lambda_j^{2 alpha - 1} < inf}.
/// For q_j = j^{-beta} the series behaves like sum j^{4 alpha - 2 - beta}, so the
/// supremum is min(1/2, (1 + beta)/4).
inline AlphaBar alpha_bar(const CovarianceSpec& cov) {
  double beta = 0.0;
  switch (cov.kind) {
    case CovarianceSpec::Kind::white:
      beta = 0.0;
      break;
    case CovarianceSpec::Kind::power_decay:
      beta = cov.beta;
      break;
    case CovarianceSpec::Kind::explicit_weights:
      throw DomainError("alpha_bar undeterminable from truncation: explicit weight lists have no analytic tail");
  }
  const double raw = (1.0 + beta) / 4.0;
  AlphaBar a;
  a.value = std::min(0.5, raw);
  a.supremum_attained = raw > 0.5;
  a.borderline = raw == 0.5;
  return a;
}

}  // namespace tspde
