#pragma once

#include <stdexcept>
#include <string>

namespace rectune {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that fails a schema/bounds/invariant check. `field()` names the
// offending path (e.g. "requirement.search_space.pre.K1.lower").
class ValidationError : public Error {
 public:
  explicit ValidationError(std::string message, std::string field = {})
      : Error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A SystemConfig that a pipeline stage cannot execute.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class StateError : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

class LockConflict : public StorageError {
 public:
  using StorageError::StorageError;
};

}  // namespace rectune
