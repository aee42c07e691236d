#pragma once

#include <stdexcept>
#include <string>

namespace mflab {

// Root of the library's exception hierarchy. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes; the message names the operation and both shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf or divergence detected in a numeric pipeline.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid input: bad configuration, violated preconditions, malformed files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A primitive was asked for a differentiation rule it does not register.
class MissingRuleError : public Error {
 public:
  using Error::Error;
};

}  // namespace mflab
