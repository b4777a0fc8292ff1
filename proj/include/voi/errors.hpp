#pragma once

#include <stdexcept>
#include <string>

namespace voi {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration, distribution parameters or problem definition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data does not match the expected layout (CSV columns, cells).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked in a state where its result would be meaningless.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Smoother could not be fitted to the supplied data.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Numerical procedure failed to converge. Carries the best estimate reached.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double best_estimate)
      : Error(what), best_estimate_(best_estimate) {}

  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

}  // namespace voi
