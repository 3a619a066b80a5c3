#pragma once

#include <stdexcept>
#include <string>

namespace roma {

// Base of every error the toolkit throws. Callers that only care about
// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Connection failure, non-200 reply or malformed payload. Retryable.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Bad parameters, dimension mismatches, unknown model names.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// The model returned something that is not a valid confidence vector.
class ModelOutputError : public Error {
 public:
  using Error::Error;
};

// Invalid data handed to a statistics routine (non-finite, out of domain, bad counts).
class InputError : public Error {
 public:
  using Error::Error;
};

// Zero-variance sample where a spread is required.
class DegenerateSampleError : public Error {
 public:
  using Error::Error;
};

// Non-positive value fed to Box-Cox.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace roma
