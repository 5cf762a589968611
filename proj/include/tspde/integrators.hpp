#pragma once

// Time stepping for dX = AX dt + F(X) dt + dW^Q.
//
// Tamed exponential Euler:
//   X_{n+1} = e^{dt A} X_n + (-A)^{-1}(I - e^{dt A}) F(X_n) / (1 + dt ||F(X_n)||) + e^{dt A} dW_n
// Untamed exponential Euler:
//   X_{n+1} = e^{dt A} (X_n + dt F(X_n) + dW_n)
//
// With NoiseForm::exact the term e^{dt A} dW_n is replaced by an exact sample
// of the stochastic convolution over one step.

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tspde/errors.hpp"
#include "tspde/noise.hpp"
#include "tspde/nonlinearity.hpp"
#include "tspde/spectral.hpp"

namespace tspde {

enum class NoiseForm { discretized, exact };

inline constexpr double kDefaultDtCap = 0.5;

struct SchemeConfig {
  double dt = 0.01;
  std::size_t steps = 100;  // N
  std::size_t modes = 64;   // J
  std::size_t nodes = 256;  // M
  bool taming = true;
  NoiseForm noise = NoiseForm::discretized;
  CovarianceSpec cov = CovarianceSpec::white();
  Nonlinearity nl = Nonlinearity::dissipative_cubic();
  SpectralField x0 = SpectralField(64);
  std::uint64_t seed = 0;
  double dt_cap = kDefaultDtCap;

  double horizon() const noexcept { return dt * static_cast<double>(steps); }

  void validate() const {
    if (!(dt_cap > 0.0)) throw ConfigError("dt_cap must be > 0");
    if (!(dt > 0.0) || !(dt <= dt_cap))
      throw ConfigError("dt=" + std::to_string(dt) + " must lie in (0, dt_cap=" + std::to_string(dt_cap) + "]");
    if (modes == 0) throw ConfigError("J must be >= 1");
    if (nodes < modes) throw ConfigError("M=" + std::to_string(nodes) + " must be >= J=" + std::to_string(modes));
    if (x0.modes() != modes) throw ConfigError("x0 has " + std::to_string(x0.modes()) + " modes, expected J");
    if (!all_finite(x0.coeffs)) throw ConfigError("x0 must be finite");
  }
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<double> l2_norms;
  std::vector<double> sup_norms;
  SpectralField final_state;
  std::optional<std::size_t> blowup_step;
};

/// Per-step diagnostics of the drift term.
struct StepInfo {
  double drift_norm = 0.0;          // ||f(X_n)||_{L^2}, node quadrature
  double drift_contribution = 0.0;  // L^2 norm of the (tamed) drift term added to X_{n+1}
};

/// Precomputed per-mode factors for one (dt, J, M, Q) combination.
/// Immutable; shared by all trajectories of a study.
struct StepOperator {
  double dt = 0.0;
  NoiseForm noise = NoiseForm::discretized;
  std::shared_ptr<const SineTransform> transform;
  std::vector<double> semigroup;  // e^{-lambda_j dt}
  std::vector<double> phi1;       // (1 - e^{-lambda_j dt}) / lambda_j
  std::vector<double> noise_std;  // sqrt(q_j dt) or exact one-step std

  StepOperator(double step, std::size_t modes, std::size_t nodes, const CovarianceSpec& cov, NoiseForm form,
               std::shared_ptr<const SineTransform> shared = nullptr)
      : dt(step), noise(form), transform(std::move(shared)) {
    if (!(dt > 0.0)) throw DomainError("StepOperator: dt must be > 0");
    if (!transform || transform->modes() != modes || transform->nodes() != nodes)
      transform = std::make_shared<const SineTransform>(modes, nodes);
    semigroup.resize(modes);
    phi1.resize(modes);
    noise_std.resize(modes);
    for (std::size_t j = 0; j < modes; ++j) {
      const double lambda = eigenvalue(j + 1);
      semigroup[j] = semigroup_factor(lambda, dt);
      phi1[j] = phi1_factor(lambda, dt);
      const double q = cov.weight(j + 1);
      noise_std[j] = form == NoiseForm::discretized ? std::sqrt(q * dt)
                                                    : std::sqrt(exact_convolution_variance(q, lambda, dt));
    }
  }

  StepOperator(const SchemeConfig& cfg, std::shared_ptr<const SineTransform> shared = nullptr)
      : StepOperator(cfg.dt, cfg.modes, cfg.nodes, cfg.cov, cfg.noise, std::move(shared)) {}

  std::size_t modes() const noexcept { return semigroup.size(); }
};

/// Single-trajectory stepping engine. Holds scratch buffers; one per thread.
class Stepper {
 public:
  Stepper(std::shared_ptr<const StepOperator> op, const Nonlinearity& nl)
      : op_(std::move(op)), eval_(nl, op_->transform), zero_drift_(nl.is_zero()), drift_(op_->modes()) {}

  const StepOperator& op() const noexcept { return *op_; }

  /// Scale standard normals into the noise term expected by step().
  void scale_noise(std::span<const double> normals, std::span<double> out) const {
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = op_->noise_std[j] * normals[j];
  }

  /// Advance x from t_n to t_{n+1}. `noise` is dW_n (discretized form) or the
  /// exact convolution increment (exact form). `step` is n, used to label
  /// overflow as step n+1.
  StepInfo step(std::span<double> x, std::span<const double> noise, bool tamed, std::size_t step) {
    const StepOperator& op = *op_;
    const std::size_t J = x.size();
    StepInfo info;
    info.drift_norm = eval_.apply(x, drift_, step + 1);
    double scale = 0.0;
    if (!zero_drift_) scale = tamed ? 1.0 / (1.0 + op.dt * info.drift_norm) : op.dt;
    if (tamed) {
      // e^{dtA}(X + dW) + phi1 F / (1 + dt||F||); with F == 0 this is
      // exactly the discrete convolution recursion
      double contrib = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        const double d = op.phi1[j] * drift_[j] * scale;
        contrib += d * d;
        const double lin = op.noise == NoiseForm::discretized ? op.semigroup[j] * (x[j] + noise[j])
                                                              : op.semigroup[j] * x[j] + noise[j];
        x[j] = lin + d;
      }
      info.drift_contribution = std::sqrt(contrib);
    } else {
      double contrib = 0.0;
      for (std::size_t j = 0; j < J; ++j) {
        const double d = scale * drift_[j];
        contrib += op.semigroup[j] * op.semigroup[j] * d * d;
        x[j] = op.noise == NoiseForm::discretized ? op.semigroup[j] * ((x[j] + d) + noise[j])
                                                  : op.semigroup[j] * (x[j] + d) + noise[j];
      }
      info.drift_contribution = std::sqrt(contrib);
    }
    if (!all_finite(x)) throw OverflowError(step + 1);
    return info;
  }

  /// Node values of the state passed to the last step() call.
  std::span<const double> last_nodes() const noexcept { return eval_.state_nodes(); }

  /// Node values of an arbitrary state (uses the evaluator's transform only).
  void synthesize(std::span<const double> x, std::span<double> nodes) const { op_->transform->synthesize(x, nodes); }

 private:
  std::shared_ptr<const StepOperator> op_;
  NemytskiiEvaluator eval_;
  bool zero_drift_;
  std::vector<double> drift_;
};

/// Noise terms read from the counter-based stream of one trajectory.
class StreamNoise {
 public:
  StreamNoise(std::uint64_t seed, std::uint32_t trajectory, std::size_t modes)
      : stream_{seed, trajectory, 0}, normals_(modes) {}

  void fill(const Stepper& stepper, std::size_t step, std::span<double> out) {
    standard_normals(stream_.at_step(step), normals_);
    stepper.scale_noise(normals_, out);
  }

 private:
  NoiseStream stream_;
  std::vector<double> normals_;
};

namespace detail {

inline SpectralField one_step(const SpectralField& x, const SchemeConfig& cfg, const NoiseStream& stream, bool tamed) {
  cfg.validate();
  if (x.modes() != cfg.modes) throw ConfigError("state has wrong mode count");
  auto op = std::make_shared<const StepOperator>(cfg);
  Stepper stepper(op, cfg.nl);
  StreamNoise noise(stream.seed, stream.trajectory, cfg.modes);
  std::vector<double> dw(cfg.modes);
  noise.fill(stepper, stream.step, dw);
  SpectralField out = x;
  stepper.step(out.coeffs, dw, tamed, stream.step);
  return out;
}

}  // namespace detail

/// One tamed step from x using the increment at stream.step.
inline SpectralField tamed_step(const SpectralField& x, const SchemeConfig& cfg, const NoiseStream& stream) {
  return detail::one_step(x, cfg, stream, true);
}

inline SpectralField untamed_step(const SpectralField& x, const SchemeConfig& cfg, const NoiseStream& stream) {
  return detail::one_step(x, cfg, stream, false);
}

/// Drives a trajectory through all cfg.steps steps; `observe(n, x, stepper)`
/// is called for n = 0..N (before stepping and after each step), `on_step(n,
/// info)` after each step. Returns the overflow step, if any.
template <class Noise, class Observe, class OnStep>
std::optional<std::size_t> run_trajectory(Stepper& stepper, Noise& noise, std::vector<double>& x, std::size_t steps,
                                          bool tamed, Observe&& observe, OnStep&& on_step) {
  std::vector<double> dw(x.size());
  observe(std::size_t{0}, std::span<const double>(x), stepper);
  for (std::size_t n = 0; n < steps; ++n) {
    noise.fill(stepper, n, dw);
    try {
      const StepInfo info = stepper.step(x, dw, tamed, n);
      on_step(n, info);
    } catch (const OverflowError& e) {
      return e.step();
    }
    observe(n + 1, std::span<const double>(x), stepper);
  }
  return std::nullopt;
}

/// Iterate the configured scheme for trajectory `trajectory`, recording norms
/// at every grid time. Overflow truncates the record and sets blowup_step.
inline TrajectoryRecord simulate(const SchemeConfig& cfg, std::uint32_t trajectory = 0,
                                 std::shared_ptr<const StepOperator> op = nullptr) {
  cfg.validate();
  if (!op) op = std::make_shared<const StepOperator>(cfg);
  Stepper stepper(op, cfg.nl);
  StreamNoise noise(cfg.seed, trajectory, cfg.modes);
  TrajectoryRecord rec;
  rec.times.reserve(cfg.steps + 1);
  rec.l2_norms.reserve(cfg.steps + 1);
  rec.sup_norms.reserve(cfg.steps + 1);
  std::vector<double> x = cfg.x0.coeffs;
  std::vector<double> nodes(cfg.nodes);
  std::vector<double> last;
  auto observe = [&](std::size_t n, std::span<const double> state, const Stepper& s) {
    s.synthesize(state, nodes);
    last.assign(state.begin(), state.end());
    rec.times.push_back(static_cast<double>(n) * cfg.dt);
    rec.l2_norms.push_back(l2_norm(state));
    rec.sup_norms.push_back(sup_norm(nodes));
  };
  rec.blowup_step = run_trajectory(stepper, noise, x, cfg.steps, cfg.taming, observe, [](std::size_t, const StepInfo&) {});
  // on blow-up x may be partially updated; the record ends at the last finite state
  rec.final_state = SpectralField(std::move(last));
  return rec;
}

/// Two trajectories driven by the identical increment sequence.
inline std::pair<TrajectoryRecord, TrajectoryRecord> simulate_coupled_pair(const SchemeConfig& cfg,
                                                                           const SpectralField& x0_a,
                                                                           const SpectralField& x0_b,
                                                                           std::uint32_t trajectory = 0) {
  if (x0_a.modes() != x0_b.modes()) throw ConfigError("coupled pair: initial conditions differ in mode count");
  SchemeConfig a = cfg;
  a.x0 = x0_a;
  SchemeConfig b = cfg;
  b.x0 = x0_b;
  auto op = std::make_shared<const StepOperator>(a);
  return {simulate(a, trajectory, op), simulate(b, trajectory, op)};
}

}  // namespace tspde
