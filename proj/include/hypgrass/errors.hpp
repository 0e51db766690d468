#pragma once

#include <stdexcept>
#include <string>

namespace hypgrass {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes or forms do not match.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented precondition (bad frame, wrong sign, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The restricted form is singular on the subspace (isotropic directions).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// A floating-point guard tripped, e.g. an eigenvalue fell too far below 1.
class NumericsError : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its cap. Carries the last residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace hypgrass
