#pragma once

#include <stdexcept>
#include <string>

namespace driverid {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or argument (maps to CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unusable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Trip log / model file could not be parsed.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

/// Feature layout of a model does not match the data it is applied to.
class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

/// Model fitting failed (e.g. the optimizer diverged).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace driverid
