#pragma once

// Sine eigenbasis of the Dirichlet Laplacian on (0,1).
//
// e_n(x) = sqrt(2) sin(n pi x), lambda_n = (n pi)^2, n = 1..J. Physical space
// is represented on the interior nodes x_k = k/(M+1), k = 1..M, with
// quadrature weight 1/(M+1); on these nodes the sines are discretely
// orthogonal, so analyze(synthesize(a)) == a up to rounding for J <= M.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "tspde/errors.hpp"

namespace tspde {

/// Coefficients a_n = <x, e_n>, n = 1..J (stored zero-based).
struct SpectralField {
  std::vector<double> coeffs;

  SpectralField() = default;
  explicit SpectralField(std::size_t modes) : coeffs(modes, 0.0) {}
  explicit SpectralField(std::vector<double> c) : coeffs(std::move(c)) {}

  std::size_t modes() const noexcept { return coeffs.size(); }
  double& operator[](std::size_t i) { return coeffs[i]; }
  double operator[](std::size_t i) const { return coeffs[i]; }

  /// Unit coefficient on mode n (1-based).
  static SpectralField unit(std::size_t modes, std::size_t n, double amplitude = 1.0) {
    if (n == 0 || n > modes) throw ConfigError("unit: mode index out of range");
    SpectralField f(modes);
    f.coeffs[n - 1] = amplitude;
    return f;
  }

  friend bool operator==(const SpectralField&, const SpectralField&) = default;
};

/// Function values at x_k = k/(M+1), k = 1..M.
struct GridField {
  std::vector<double> values;

  GridField() = default;
  explicit GridField(std::size_t nodes) : values(nodes, 0.0) {}
  explicit GridField(std::vector<double> v) : values(std::move(v)) {}

  std::size_t nodes() const noexcept { return values.size(); }
};

inline double eigenvalue(std::size_t n) {
  if (n == 0) throw DomainError("eigenvalue: mode index must be >= 1");
  const double k = static_cast<double>(n) * std::numbers::pi;
  return k * k;
}

/// lambda_1..lambda_J.
struct EigenStructure {
  std::vector<double> lambdas;

  explicit EigenStructure(std::size_t modes) : lambdas(modes) {
    if (modes == 0) throw ConfigError("EigenStructure: need at least one mode");
    for (std::size_t n = 1; n <= modes; ++n) lambdas[n - 1] = eigenvalue(n);
  }
  std::size_t modes() const noexcept { return lambdas.size(); }
};

inline double node_position(std::size_t k, std::size_t nodes) {
  return static_cast<double>(k) / static_cast<double>(nodes + 1);
}

inline double semigroup_factor(double lambda, double t) { return std::exp(-lambda * t); }

/// (1 - e^{-lambda dt}) / lambda, without cancellation for small lambda*dt.
inline double phi1_factor(double lambda, double dt) { return -std::expm1(-lambda * dt) / lambda; }

/// Cached synthesis/analysis matrices for a (J, M) pair.
///
/// Uses the reflection x_k <-> x_{M+1-k}: odd modes are symmetric and even
/// modes antisymmetric about x = 1/2, so only half of the nodes are stored.
/// Immutable after construction; share between threads freely.
class SineTransform {
 public:
  SineTransform(std::size_t modes, std::size_t nodes) : modes_(modes), nodes_(nodes) {
    if (modes == 0) throw ConfigError("SineTransform: need at least one mode");
    if (nodes < modes)
      throw ConfigError("SineTransform: node count M=" + std::to_string(nodes) +
                        " is smaller than mode count J=" + std::to_string(modes));
    half_ = nodes / 2;
    n_odd_ = (modes + 1) / 2;
    n_even_ = modes / 2;
    const std::size_t period = 2 * (nodes + 1);
    auto basis = [&](std::size_t n, std::size_t k) {
      // exact argument reduction keeps the table accurate for large n*k
      const std::size_t r = (n * k) % period;
      return std::numbers::sqrt2 *
             std::sin(std::numbers::pi * static_cast<double>(r) / static_cast<double>(nodes + 1));
    };
    odd_nk_.resize(n_odd_ * half_);
    even_nk_.resize(n_even_ * half_);
    odd_kn_.resize(half_ * n_odd_);
    even_kn_.resize(half_ * n_even_);
    for (std::size_t k = 1; k <= half_; ++k) {
      for (std::size_t i = 0; i < n_odd_; ++i) {
        const double v = basis(2 * i + 1, k);
        odd_nk_[i * half_ + (k - 1)] = v;
        odd_kn_[(k - 1) * n_odd_ + i] = v;
      }
      for (std::size_t i = 0; i < n_even_; ++i) {
        const double v = basis(2 * i + 2, k);
        even_nk_[i * half_ + (k - 1)] = v;
        even_kn_[(k - 1) * n_even_ + i] = v;
      }
    }
    if (nodes % 2 == 1) {
      mid_.resize(n_odd_);
      for (std::size_t i = 0; i < n_odd_; ++i) mid_[i] = (i % 2 == 0) ? std::numbers::sqrt2 : -std::numbers::sqrt2;
    }
  }

  std::size_t modes() const noexcept { return modes_; }
  std::size_t nodes() const noexcept { return nodes_; }

  void synthesize(std::span<const double> coeffs, std::span<double> values) const {
    if (coeffs.size() != modes_ || values.size() != nodes_)
      throw ConfigError("SineTransform::synthesize: size mismatch");
    // values[0..half) hold the symmetric part, values[half..2 half) the antisymmetric part
    double* sym = values.data();
    double* anti = values.data() + half_;
    std::fill(values.begin(), values.end(), 0.0);
    for (std::size_t i = 0; i < n_odd_; ++i) {
      const double a = coeffs[2 * i];
      const double* row = &odd_nk_[i * half_];
      for (std::size_t k = 0; k < half_; ++k) sym[k] += a * row[k];
    }
    for (std::size_t i = 0; i < n_even_; ++i) {
      const double a = coeffs[2 * i + 1];
      const double* row = &even_nk_[i * half_];
      for (std::size_t k = 0; k < half_; ++k) anti[k] += a * row[k];
    }
    double mid = 0.0;
    if (nodes_ % 2 == 1)
      for (std::size_t i = 0; i < n_odd_; ++i) mid += coeffs[2 * i] * mid_[i];
    // unfold: v_k = S_k + A_k, v_{M+1-k} = S_k - A_k (1-based k <= half)
    for (std::size_t k = 0; k < half_; ++k) {
      const double s = sym[k];
      const double a = anti[k];
      sym[k] = s + a;
      anti[k] = s - a;
    }
    // anti now holds v_{M}, v_{M-1}, ... in reverse order at the wrong offset
    if (nodes_ % 2 == 1) {
      // shift right by one to leave room for the midpoint
      for (std::size_t k = half_; k-- > 0;) values[half_ + 1 + k] = values[half_ + k];
      values[half_] = mid;
      std::reverse(values.begin() + static_cast<std::ptrdiff_t>(half_ + 1), values.end());
    } else {
      std::reverse(values.begin() + static_cast<std::ptrdiff_t>(half_), values.end());
    }
  }

  void analyze(std::span<const double> values, std::span<double> coeffs) const {
    if (coeffs.size() != modes_ || values.size() != nodes_)
      throw ConfigError("SineTransform::analyze: size mismatch");
    const double w = 1.0 / static_cast<double>(nodes_ + 1);
    std::vector<double> acc_odd(n_odd_, 0.0);
    std::vector<double> acc_even(n_even_, 0.0);
    for (std::size_t k = 0; k < half_; ++k) {
      const double left = values[k];
      const double right = values[nodes_ - 1 - k];
      const double s = left + right;
      const double d = left - right;
      const double* ro = &odd_kn_[k * n_odd_];
      for (std::size_t i = 0; i < n_odd_; ++i) acc_odd[i] += s * ro[i];
      const double* re = &even_kn_[k * n_even_];
      for (std::size_t i = 0; i < n_even_; ++i) acc_even[i] += d * re[i];
    }
    if (nodes_ % 2 == 1) {
      const double v = values[half_];
      for (std::size_t i = 0; i < n_odd_; ++i) acc_odd[i] += v * mid_[i];
    }
    for (std::size_t i = 0; i < n_odd_; ++i) coeffs[2 * i] = w * acc_odd[i];
    for (std::size_t i = 0; i < n_even_; ++i) coeffs[2 * i + 1] = w * acc_even[i];
  }

 private:
  std::size_t modes_;
  std::size_t nodes_;
  std::size_t half_ = 0;
  std::size_t n_odd_ = 0;
  std::size_t n_even_ = 0;
  std::vector<double> odd_nk_, even_nk_;  // mode-major, for synthesis
  std::vector<double> odd_kn_, even_kn_;  // node-major, for analysis
  std::vector<double> mid_;
};

inline GridField synthesize(const SpectralField& field, std::size_t nodes) {
  if (nodes < field.modes())
    throw ConfigError("synthesize: M=" + std::to_string(nodes) + " < J=" + std::to_string(field.modes()));
  const SineTransform t(field.modes(), nodes);
  GridField g(nodes);
  t.synthesize(field.coeffs, g.values);
  return g;
}

inline SpectralField analyze(const GridField& grid, std::size_t modes) {
  if (modes > grid.nodes())
    throw ConfigError("analyze: J=" + std::to_string(modes) + " > M=" + std::to_string(grid.nodes()));
  const SineTransform t(modes, grid.nodes());
  SpectralField f(modes);
  t.analyze(grid.values, f.coeffs);
  return f;
}

inline SpectralField apply_semigroup(const SpectralField& field, double t) {
  if (!(t >= 0.0)) throw DomainError("apply_semigroup: t must be >= 0");
  SpectralField out = field;
  for (std::size_t n = 0; n < out.modes(); ++n) out[n] *= semigroup_factor(eigenvalue(n + 1), t);
  return out;
}

/// (-A)^{-1}(I - e^{dt A}) applied mode-wise.
inline SpectralField apply_phi1(const SpectralField& field, double dt) {
  if (!(dt > 0.0)) throw DomainError("apply_phi1: dt must be > 0");
  SpectralField out = field;
  for (std::size_t n = 0; n < out.modes(); ++n) out[n] *= phi1_factor(eigenvalue(n + 1), dt);
  return out;
}

/// (-A)^alpha for alpha in [-1, 1].
inline SpectralField apply_fractional(const SpectralField& field, double alpha) {
  if (!(std::abs(alpha) <= 1.0)) throw DomainError("apply_fractional: |alpha| must be <= 1");
  SpectralField out = field;
  for (std::size_t n = 0; n < out.modes(); ++n) out[n] *= std::pow(eigenvalue(n + 1), alpha);
  return out;
}

inline double l2_norm(std::span<const double> coeffs) {
  double s = 0.0;
  for (double a : coeffs) s += a * a;
  return std::sqrt(s);
}

inline double l2_norm(const SpectralField& field) { return l2_norm(field.coeffs); }

/// Node-quadrature L^p norm, ((1/(M+1)) sum |v_k|^p)^{1/p}.
inline double lp_norm(std::span<const double> values, double p) {
  if (!(p >= 1.0)) throw DomainError("lp_norm: p must be >= 1");
  if (values.empty()) throw ConfigError("lp_norm: empty grid");
  const double w = 1.0 / static_cast<double>(values.size() + 1);
  double s = 0.0;
  if (p == 2.0) {
    for (double v : values) s += v * v;
    return std::sqrt(w * s);
  }
  for (double v : values) s += std::pow(std::abs(v), p);
  return std::pow(w * s, 1.0 / p);
}

inline double lp_norm(const GridField& grid, double p) { return lp_norm(grid.values, p); }

inline double sup_norm(std::span<const double> values) {
  if (values.empty()) throw ConfigError("sup_norm: empty grid");
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

inline double sup_norm(const GridField& grid) { return sup_norm(grid.values); }

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace tspde
