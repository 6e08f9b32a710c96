#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlc {

/// Invalid input or configuration; maps to CLI exit code 1.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure during a numerical computation; maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateSampleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A path left the finite region (non-finite or |x_i| > 1e6).
class DivergenceError : public NumericalError {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : NumericalError(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Phase-speed denominator of the linear Hopf model vanished.
class SingularityError : public NumericalError {
 public:
  SingularityError(std::size_t step, const std::string& what)
      : NumericalError(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A numerical error raised by ensemble member `path()`.
class PathError : public NumericalError {
 public:
  PathError(std::size_t path, const std::string& what)
      : NumericalError("path " + std::to_string(path) + ": " + what), path_(path) {}
  std::size_t path() const noexcept { return path_; }

 private:
  std::size_t path_;
};

class NoCycleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FixedPointError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepSizeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class GuessFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace nlc
