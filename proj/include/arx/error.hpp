#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace arx {

/// Invalid input: bad dimensions, non-SPD covariances, malformed config.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The polynomial B(z) has a zero inside the closed unit disk (up to margin).
class NonCausalError : public std::runtime_error {
 public:
  NonCausalError(const std::string& what, double spectral_radius)
      : std::runtime_error(what), spectral_radius_(spectral_radius) {}
  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  double spectral_radius_;
};

/// A numerical routine could not complete (singular matrix, non-finite data).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed-loop simulation diverged or was fed non-finite data.
class SimulationAborted : public NumericalError {
 public:
  SimulationAborted(const std::string& what, std::int64_t step)
      : NumericalError(what), step_(step) {}
  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t step_;
};

}  // namespace arx
