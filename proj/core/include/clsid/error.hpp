#pragma once

#include <stdexcept>
#include <string>

namespace clsid {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-supplied data or configuration is invalid. The CLI maps this
/// family to exit code 1; every other Error maps to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Dimension mismatch or a model outside the supported family.
class StructuralError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A value lies outside an admissible range (e.g. a cutoff outside a band).
class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Input signal carries no information (constant input to an estimator).
class ExcitationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Operation requires an asymptotically stable model.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// An iterative method failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Observer design impossible for the given (A, C) pair.
class DetectabilityError : public Error {
 public:
  using Error::Error;
};

/// Numerically singular quantity encountered (e.g. innovation covariance).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Global planner found no path.
class PlanningError : public Error {
 public:
  using Error::Error;
};

/// A simulated episode or plant experiment failed.
class EpisodeError : public Error {
 public:
  using Error::Error;
};

/// Throws ValidationError naming @p field when @p condition is false.
void require(bool condition, const std::string& field, const std::string& message);

}  // namespace clsid
