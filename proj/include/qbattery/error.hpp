#pragma once

#include <stdexcept>
#include <string>

namespace qbat {

/// Invalid user input: bad configuration keys, out-of-range parameters,
/// malformed files. Maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: step-size underflow, truncation breach, eigensolver
/// or steady-state non-convergence. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Population leaked into the top cavity levels beyond the monitor limit.
class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace qbat
