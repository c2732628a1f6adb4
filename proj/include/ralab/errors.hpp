#pragma once

#include <stdexcept>
#include <string>

namespace ralab {

// Bad user-supplied data or parameters. CLI maps this to exit code 2.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Request exceeds a hard implementation limit (e.g. exhaustive enumeration
// above the supported system size).
struct CapabilityError : InputError {
  using InputError::InputError;
};

// Numerical failure during a computation. CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Eigenvector matrix too ill-conditioned for a spectral propagator.
struct IllConditionedError : NumericalError {
  IllConditionedError(const std::string& what, double cond)
      : NumericalError(what), condition_number(cond) {}
  double condition_number = 0.0;
};

}  // namespace ralab
