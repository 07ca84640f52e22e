#pragma once

#include <stdexcept>
#include <string>

namespace zsg {

/// Raised by solve() when neither discounting nor absorption certifies
/// convergence of value iteration.
struct NotContractiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MismatchedStateSpacesError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Mesh width would create negative transition probabilities.
/// Carries the largest admissible mesh for the offending spec.
struct HTooLargeError : std::runtime_error {
  HTooLargeError(double h, double bound)
      : std::runtime_error("mesh h=" + std::to_string(h) +
                           " exceeds admissible bound h_max=" + std::to_string(bound)),
        h_max(bound) {}
  double h_max;
};

struct DegenerateDiffusionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConsistencyViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A game handed to the solver failed validate_game().
struct GameValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range configuration; the message names the field.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace zsg
