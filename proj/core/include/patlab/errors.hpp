#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A field carries NaN/Inf values or does not match its grid.
class InvalidFieldError : public Error {
 public:
  using Error::Error;
};

/// A boundary trace is empty, too short, or non-finite.
class InvalidTraceError : public Error {
 public:
  using Error::Error;
};

/// Two objects that must share a grid or recording geometry do not.
class GeometryMismatchError : public Error {
 public:
  using Error::Error;
};

/// A configuration value violates a documented invariant.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SolverFailureError : public Error {
 public:
  SolverFailureError(const std::string& what, double residual)
      : Error(what + " (relative residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// The explicit time stepper produced |u| > 1e12.
class BlowUpError : public Error {
 public:
  explicit BlowUpError(std::size_t step)
      : Error("wave solution blew up at time step " + std::to_string(step)), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A ratio would divide by a vanishing reference quantity.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// An iteration diverged under the configured step size.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// A perturbation target cannot be reached within the admissible bounds.
class SaturationError : public Error {
 public:
  SaturationError(const std::string& what, double achievable)
      : Error(what + " (achievable maximum " + std::to_string(achievable) + ")"),
        achievable_(achievable) {}
  double achievable() const noexcept { return achievable_; }

 private:
  double achievable_;
};

/// An ensemble member violates a precondition of the stability report.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace patlab
