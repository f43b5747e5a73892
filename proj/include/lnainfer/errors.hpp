#pragma once

#include <stdexcept>

namespace lnainfer {

// Malformed input data or configuration. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical breakdown (non-finite likelihood, covariance not positive definite).
// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lnainfer
