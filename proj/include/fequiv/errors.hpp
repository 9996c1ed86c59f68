#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fequiv {

// Base for every error raised by the library. The CLI maps these to exit
// code 1; InvariantViolation maps to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes, dimensions or architectures do not agree.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A value is outside the domain of the operation (nonpositive epsilon,
// invalid permutation, zero factorial argument, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The transform requires an activation property the layer does not have.
class UnsupportedTransformError : public Error {
 public:
  using Error::Error;
};

// A configuration is inconsistent with the requested operation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite value encountered while evaluating a network.
class NumericError : public Error {
 public:
  NumericError(std::size_t layer, const std::string& what)
      : Error(what), layer_(layer) {}
  // 1-based layer whose output became non-finite (L+1 is the output layer).
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

// A property the library guarantees did not hold at runtime.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace fequiv
