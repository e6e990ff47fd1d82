#pragma once

#include <stdexcept>
#include <string>

namespace harmonic {

/// A parameter set, config or argument violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Config text could not be parsed, or holds an unknown or mistyped key.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A rate became non-finite or exceeded the divergence bound during a run.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double t_ms)
      : std::runtime_error(what), t_ms_(t_ms) {}

  [[nodiscard]] auto t_ms() const -> double { return t_ms_; }

 private:
  double t_ms_;
};

/// Decoding was requested on a field with no positive rate.
class NoBumpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Analysis window is empty or not covered by the trace or schedule.
class WindowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace harmonic
