#pragma once

// Polynomial reaction terms f and their Nemytskii lift F(x)(xi) = f(x(xi)).

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tspde/errors.hpp"
#include "tspde/spectral.hpp"

namespace tspde {

/// f(z) = sum_k c_k z^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) {
    for (double v : c_)
      if (!std::isfinite(v)) throw ConfigError("polynomial coefficients must be finite");
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }

  const std::vector<double>& coeffs() const noexcept { return c_; }
  /// Degree; the zero polynomial reports 0.
  std::size_t degree() const noexcept { return c_.empty() ? 0 : c_.size() - 1; }
  bool is_zero() const noexcept { return c_.empty(); }

  double operator()(double z) const noexcept {
    double r = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) r = r * z + c_[k];
    return r;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return Polynomial{};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

 private:
  std::vector<double> c_;
};

namespace detail {

// Real roots of p inside [lo, hi], located by sign changes on a fine scan and
// refined by bisection. Tangential roots without a sign change are missed;
// callers only use them as candidate extrema alongside the scan points.
inline std::vector<double> real_roots(const Polynomial& p, double lo, double hi, std::size_t scan = 4096) {
  std::vector<double> roots;
  if (p.is_zero() || p.degree() == 0 || !(hi > lo)) return roots;
  const double h = (hi - lo) / static_cast<double>(scan);
  double a = lo;
  double fa = p(a);
  for (std::size_t i = 1; i <= scan; ++i) {
    const double b = (i == scan) ? hi : lo + h * static_cast<double>(i);
    const double fb = p(b);
    if (fa == 0.0) {
      roots.push_back(a);
    } else if ((fa < 0.0) != (fb < 0.0) && fb != 0.0) {
      double x0 = a, x1 = b, f0 = fa;
      for (int it = 0; it < 200 && x1 - x0 > 1e-15 * std::max(1.0, std::abs(x0)); ++it) {
        const double m = 0.5 * (x0 + x1);
        const double fm = p(m);
        if ((fm < 0.0) == (f0 < 0.0)) {
          x0 = m;
          f0 = fm;
        } else {
          x1 = m;
        }
      }
      roots.push_back(0.5 * (x0 + x1));
    }
    a = b;
    fa = fb;
  }
  if (fa == 0.0) roots.push_back(hi);
  return roots;
}

// sup of a polynomial over the real line (+inf when unbounded above).
inline double polynomial_sup(const Polynomial& p) {
  if (p.degree() == 0) return p.is_zero() ? 0.0 : p.coeffs()[0];
  const double lead = p.coeffs().back();
  if (p.degree() % 2 == 1 || lead > 0.0) return std::numeric_limits<double>::infinity();
  const Polynomial dp = p.derivative();
  // Cauchy bound on the critical points
  double bound = 0.0;
  const auto& c = dp.coeffs();
  for (std::size_t k = 0; k + 1 < c.size(); ++k) bound = std::max(bound, std::abs(c[k] / c.back()));
  bound += 1.0;
  double best = -std::numeric_limits<double>::infinity();
  for (double r : real_roots(dp, -bound, bound)) best = std::max(best, p(r));
  best = std::max({best, p(-bound), p(bound)});
  return best;
}

}  // namespace detail

struct Nonlinearity {
  std::string name = "zero";
  Polynomial f;
  Polynomial df;
  Polynomial d2f;
  double growth_q = 2.0;
  /// sup_z f'(z); +inf when f' is unbounded above.
  double lambda_F = 0.0;
  /// Dissipativity margin gamma, certified only when lambda_F < 0.
  std::optional<double> gamma_claim;
  std::vector<std::string> warnings;

  static Nonlinearity polynomial(std::vector<double> coeffs, std::string name = "polynomial") {
    Nonlinearity nl;
    nl.name = std::move(name);
    nl.f = Polynomial(std::move(coeffs));
    nl.df = nl.f.derivative();
    nl.d2f = nl.df.derivative();
    nl.growth_q = std::max(2.0, static_cast<double>(nl.f.degree()));
    nl.lambda_F = detail::polynomial_sup(nl.df);
    if (nl.lambda_F < 0.0) nl.gamma_claim = -nl.lambda_F;
    if (!(nl.lambda_F < 0.0) && nl.lambda_F < eigenvalue(1))
      nl.warnings.push_back("p = q dissipativity unverified (lambda_F >= 0); only the p = 2 condition holds");
    else if (!(nl.lambda_F < eigenvalue(1)))
      nl.warnings.push_back("dissipativity unverified (lambda_F >= lambda_1)");
    return nl;
  }

  static Nonlinearity zero() {
    Nonlinearity nl = polynomial({}, "zero");
    nl.gamma_claim.reset();
    nl.warnings.clear();
    return nl;
  }

  /// f(z) = -c z.
  static Nonlinearity linear(double c) {
    if (!(c >= 0.0)) throw ConfigError("linear nonlinearity: c must be >= 0");
    if (c == 0.0) return zero();
    return polynomial({0.0, -c}, "linear");
  }

  /// f(z) = -z^3 - c z; lambda_F = -c.
  static Nonlinearity dissipative_cubic(double c = 1.0) {
    if (!(c > 0.0)) throw ConfigError("dissipative cubic: c must be > 0");
    return polynomial({0.0, -c, 0.0, -1.0}, "cubic");
  }

  /// f(z) = -z^3 + a z; lambda_F = a.
  static Nonlinearity allen_cahn(double a) {
    if (!std::isfinite(a)) throw ConfigError("allen-cahn: a must be finite");
    return polynomial({0.0, a, 0.0, -1.0}, "allen-cahn");
  }

  bool is_zero() const noexcept { return f.is_zero(); }
};

/// Pseudo-spectral evaluation of F on a fixed (J, M) transform. Holds scratch
/// buffers, so one instance per thread.
class NemytskiiEvaluator {
 public:
  NemytskiiEvaluator(const Nonlinearity& nl, std::shared_ptr<const SineTransform> transform)
      : f_(nl.f), transform_(std::move(transform)), nodes_(transform_->nodes()), fvals_(transform_->nodes()) {}

  /// out <- P_J f(x) ; returns the node-quadrature L^2 norm of f(x).
  /// Throws OverflowError(step) if any node value of f(x) is non-finite.
  double apply(std::span<const double> x, std::span<double> out, std::size_t step = 0) {
    transform_->synthesize(x, nodes_);
    if (f_.is_zero()) {
      std::fill(out.begin(), out.end(), 0.0);
      return 0.0;
    }
    for (std::size_t k = 0; k < nodes_.size(); ++k) fvals_[k] = f_(nodes_[k]);
    if (!all_finite(fvals_)) throw OverflowError(step);
    transform_->analyze(fvals_, out);
    const double norm = lp_norm(fvals_, 2.0);
    if (!std::isfinite(norm)) throw OverflowError(step);
    return norm;
  }

  /// Node values of the last argument passed to apply().
  std::span<const double> state_nodes() const noexcept { return nodes_; }

 private:
  Polynomial f_;
  std::shared_ptr<const SineTransform> transform_;
  std::vector<double> nodes_;
  std::vector<double> fvals_;
};

inline SpectralField apply_nemytskii(const SpectralField& x, const Nonlinearity& nl, std::size_t nodes,
                                     std::size_t step = 0) {
  NemytskiiEvaluator ev(nl, std::make_shared<const SineTransform>(x.modes(), nodes));
  SpectralField out(x.modes());
  ev.apply(x.coeffs, out.coeffs, step);
  return out;
}

/// M_n = ||f(x)||_{L^2}, node quadrature.
inline double drift_norm(const SpectralField& x, const Nonlinearity& nl, std::size_t nodes, std::size_t step = 0) {
  NemytskiiEvaluator ev(nl, std::make_shared<const SineTransform>(x.modes(), nodes));
  std::vector<double> scratch(x.modes());
  return ev.apply(x.coeffs, scratch, step);
}

struct AuditReport {
  double z_min = 0.0;
  double z_max = 0.0;
  std::size_t samples = 0;
  double sup_fprime = 0.0;
  /// Slope of log(|f|+|f'|+|f''|) against log(1+|z|) over the outer half of the range.
  double growth_exponent = 0.0;
  /// max over samples of (|f|+|f'|+|f''|) / (1 + |z|^q).
  double growth_constant = 0.0;
  bool p2_ok = false;     // sup f' < lambda_1
  bool all_p_ok = false;  // sup f' < 0
  std::string status;
};

/// Numerical check of polynomial growth and one-sided Lipschitz conditions on
/// [z_min, z_max]. Says nothing about f outside the sampled range.
inline AuditReport audit_assumptions(const Nonlinearity& nl, double z_min, double z_max, std::size_t samples = 2001) {
  if (!std::isfinite(z_min) || !std::isfinite(z_max) || !(z_max > z_min))
    throw ConfigError("audit: z range must be bounded with z_min < z_max");
  if (samples < 2) throw ConfigError("audit: need at least 2 samples");
  AuditReport r;
  r.z_min = z_min;
  r.z_max = z_max;
  r.samples = samples;

  std::vector<double> zs(samples);
  for (std::size_t i = 0; i < samples; ++i)
    zs[i] = z_min + (z_max - z_min) * static_cast<double>(i) / static_cast<double>(samples - 1);
  zs.back() = z_max;
  std::vector<double> candidates = zs;
  for (double c : detail::real_roots(nl.d2f, z_min, z_max)) candidates.push_back(c);

  r.sup_fprime = -std::numeric_limits<double>::infinity();
  for (double z : candidates) r.sup_fprime = std::max(r.sup_fprime, nl.df(z));

  auto g = [&](double z) { return std::abs(nl.f(z)) + std::abs(nl.df(z)) + std::abs(nl.d2f(z)); };
  const double zabs = std::max(std::abs(z_min), std::abs(z_max));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (double z : zs) {
    const double a = std::abs(z);
    r.growth_constant = std::max(r.growth_constant, g(z) / (1.0 + std::pow(a, nl.growth_q)));
    if (a >= 0.5 * zabs && a >= 1.0 && g(z) > 0.0) {
      const double lx = std::log1p(a), ly = std::log(g(z));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
  }
  const double den = static_cast<double>(n) * sxx - sx * sx;
  r.growth_exponent = (n >= 2 && den > 0.0) ? (static_cast<double>(n) * sxy - sx * sy) / den
                                            : std::numeric_limits<double>::quiet_NaN();

  r.p2_ok = r.sup_fprime < eigenvalue(1);
  r.all_p_ok = r.sup_fprime < 0.0;
  if (r.all_p_ok)
    r.status = "dissipative for all p (sup f' < 0)";
  else if (r.p2_ok)
    r.status = "p = 2 condition holds (sup f' < lambda_1); p = q dissipativity unverified";
  else
    r.status = "unverified (sup f' >= lambda_1)";
  return r;
}

}  // namespace tspde
