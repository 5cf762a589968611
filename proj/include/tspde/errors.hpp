#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tspde {

/// Invalid sizes, inconsistent parameters, malformed configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A non-finite value appeared while evaluating the drift or advancing a
/// state. Carries the index of the state that could not be computed.
class OverflowError : public std::runtime_error {
 public:
  explicit OverflowError(std::size_t step)
      : std::runtime_error("non-finite value at step " + std::to_string(step)),
        step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Numeric failure of a run that must not fail (tamed scheme overflow).
class NumericFailure : public std::runtime_error {
 public:
  NumericFailure(std::size_t trajectory, std::size_t step)
      : std::runtime_error("tamed scheme overflow in trajectory " +
                           std::to_string(trajectory) + " at step " +
                           std::to_string(step)),
        trajectory_(trajectory),
        step_(step) {}

  std::size_t trajectory() const noexcept { return trajectory_; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t trajectory_;
  std::size_t step_;
};

}  // namespace tspde
