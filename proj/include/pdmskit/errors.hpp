// pdmskit -- error taxonomy shared by all modules.
//
// Every failure mode the library can signal is a subclass of pdmskit::Error.
// The CLI maps InputError/DegeneracyError to exit code 2 (bad input) and the
// remaining categories to exit code 1 (a checked property fails).
#ifndef PDMSKIT_ERRORS_HPP
#define PDMSKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pdmskit {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed files, unknown names, out-of-range indices, mismatched index
// sets, non-finite entries -- anything wrong with the caller's data.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
};

// A matrix required to be positive semidefinite is not (beyond tolerance).
class NotPsdError : public Error {
 public:
  NotPsdError(const std::string& what, double lambda_min)
      : Error(what), lambda_min_(lambda_min) {}
  double lambda_min() const { return lambda_min_; }

 private:
  double lambda_min_;
};

// douglas_solve: the right-hand side is not contained in the range of the
// left factor within tolerance.
class RangeViolationError : public Error {
 public:
  RangeViolationError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// build_WZ: the requested subspace meets the range of the operator, so the
// construction is degenerate at finite dimension.  Carries the measured
// smallest principal angle between the subspace and the range.
class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& what, double angle)
      : Error(what), angle_(angle) {}
  double angle() const { return angle_; }

 private:
  double angle_;
};

// A countable kernel lacks a declared square-summability tail bound (or the
// bound exceeds the caller's budget) where one is required.
class TailBoundError : public Error {
 public:
  explicit TailBoundError(const std::string& what) : Error(what) {}
};

// A documented operation precondition fails (entry bound, trace bound, ...).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(what) {}
};

}  // namespace pdmskit

#endif  // PDMSKIT_ERRORS_HPP
