#pragma once

#include <stdexcept>
#include <string>

namespace isac {

/// Base class for every error raised by the library. The CLI maps each
/// subclass onto its own exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad scenario parameters, registry problems,
/// missing templates.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-contract input data.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Requested packet rate exceeds what the stream provides.
class RateError : public InputError {
 public:
  using InputError::InputError;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Bad magic, version mismatch or truncation in a binary container.
class FormatError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace isac
