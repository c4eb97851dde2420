#pragma once

#include <stdexcept>
#include <string>

namespace drama {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or precondition violated by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (files, triplets, corpora).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Tensor extents do not conform to a primitive's signature.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf encountered where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Failure talking to an external chat-completion endpoint.
class ClientError : public Error {
 public:
  ClientError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_;
};

}  // namespace drama

namespace drama {

/// Embedding collapsed to the zero vector (e.g. after MRL truncation).
class DegenerateEmbeddingError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace drama
