#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgap {

// Caller-side mistakes: bad input files, out-of-range configs, shape mismatches.
// The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Failures that happen while computing. The CLI maps these to exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvariantError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class NumericalError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

class ResourceError : public RuntimeFailure {
 public:
  ResourceError(const std::string& what, std::size_t required_bytes)
      : RuntimeFailure(what + " (requires " + std::to_string(required_bytes) + " bytes)"),
        required_bytes_(required_bytes) {}
  std::size_t required_bytes() const noexcept { return required_bytes_; }

 private:
  std::size_t required_bytes_;
};

class TrainingError : public RuntimeFailure {
 public:
  TrainingError(const std::string& what, int last_finite_epoch)
      : RuntimeFailure(what + " (last finite epoch " + std::to_string(last_finite_epoch) + ")"),
        last_finite_epoch_(last_finite_epoch) {}
  int last_finite_epoch() const noexcept { return last_finite_epoch_; }

 private:
  int last_finite_epoch_;
};

class ExhaustedError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace sgap
