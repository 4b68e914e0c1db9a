#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace fluxsr {

// Error hierarchy. The CLI maps ConfigError to exit code 2 and every other
// Error to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input or configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation does not hold for the given
// arguments (e.g. alpha <= 0.5, or no balancing flux exists).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Diagonalization failure, integrator drift, poor two-level fit.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace units {

// Magnetic flux quantum h/2e in Wb.
inline constexpr double kFluxQuantum = 2.067833848e-15;
// Planck constant in J s.
inline constexpr double kPlanck = 6.62607015e-34;

// Internal dynamics units are angular frequencies in rad/ns. Config files
// give ordinary frequencies.
inline constexpr double mhz_to_rad_per_ns(double mhz) { return kTwoPi * mhz * 1e-3; }
inline constexpr double ghz_to_rad_per_ns(double ghz) { return kTwoPi * ghz; }
inline constexpr double rad_per_ns_to_mhz(double w) { return w / kTwoPi * 1e3; }

}  // namespace units
}  // namespace fluxsr
