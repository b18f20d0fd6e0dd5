#pragma once

#include <stdexcept>
#include <string>

namespace adkit {

/// Input that violates a documented precondition (bad parameters, shapes,
/// malformed files). The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that could not be completed to the promised accuracy:
/// overflow, loss of definiteness, step-size underflow, ill-conditioning.
/// The CLI maps it to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace adkit
