#pragma once

#include <stdexcept>
#include <string>

namespace cate {

// Shape or dimension contract violated by the caller.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A value that must be finite turned into NaN or Inf.
class NonFiniteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training loss diverged; carries the epoch at which it happened.
class TrainingDiverged : public NonFiniteError {
 public:
  TrainingDiverged(const std::string& what, std::size_t epoch)
      : NonFiniteError(what), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

// Bad input data: unreadable CSV, missing column, single-class treatment.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad run configuration: unknown flag, type mismatch, conflicting fields.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cate
