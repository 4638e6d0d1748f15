#pragma once

#include <stdexcept>
#include <string>

namespace dsgd {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A NaN or infinity appeared in an input or output.
class InvalidNumber : public Error {
 public:
  using Error::Error;
};

// Vector or matrix lengths do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or precondition violation on user-supplied settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnsupportedModel : public Error {
 public:
  using Error::Error;
};

class EstimateUnavailable : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dsgd
