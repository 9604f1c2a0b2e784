#pragma once

#include <stdexcept>
#include <string>

namespace breathfind {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameters or configuration that violate a documented precondition.
class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be processed (malformed files, empty frames,
/// mismatched dimensions).
class DataError : public Error {
 public:
  using Error::Error;
};

class EmptyFrameError : public DataError {
 public:
  using DataError::DataError;
};

class DimensionMismatch : public DataError {
 public:
  using DataError::DataError;
};

/// A linear system that could not be factored or solved to tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace breathfind
