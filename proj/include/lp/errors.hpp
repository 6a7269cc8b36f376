#pragma once

#include <stdexcept>
#include <string>

namespace lp {

/// Bad input: malformed configuration, out-of-range parameters, mismatched grids.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that ran but could not deliver: non-convergence, truncation guard, blow-up.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lp
