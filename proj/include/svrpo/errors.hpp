#pragma once

#include <stdexcept>
#include <string>

namespace svrpo {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument to an operation (dimension mismatch, empty subsample, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown configuration key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Misuse of an object's lifecycle (e.g. stepping a finished episode).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: non-finite intermediate, non-positive curvature, ...
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Importance-ratio overflow. The line search treats this as a signal to
/// shrink the step; anywhere else it propagates as a numerical error.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed checkpoint or data file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace svrpo
