#pragma once

#include <stdexcept>
#include <string>

namespace kskit {

inline constexpr double pi = 3.141592653589793238462643383279502884;

/// Raised for invalid run configurations (bad scheme name, non-positive dt,
/// incompatible model/scheme pairing, malformed JSON). CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a solver fails at runtime (Picard non-convergence, non-finite
/// iterate, infeasible projection target). CLI exit code 3.
class solver_error : public std::runtime_error {
 public:
  explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace kskit
