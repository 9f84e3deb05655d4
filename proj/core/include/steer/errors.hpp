#pragma once

#include <stdexcept>
#include <string>

namespace steer {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes or register layouts do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A function was asked for a value outside its domain (e.g. log of zero on
// the retained spectrum, an out-of-range parameter).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A constructed object violates one of its type invariants. The message
// names the invariant.
class InvariantError : public Error {
 public:
  using Error::Error;
};

// An iterative routine hit its iteration cap. Carries the final residual.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// A serialized document could not be parsed or has the wrong structure.
class FormatError : public Error {
 public:
  using Error::Error;
};

// An optimizer produced an inconsistent certificate (e.g. an inverted
// bracket).
class SolverFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace steer
