#pragma once

#include <stdexcept>
#include <string>

namespace dminer {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unusable input data (files, tables, folds).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value; `field()` names the offending knob.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace dminer
