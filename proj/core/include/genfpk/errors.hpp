#pragma once

#include <stdexcept>
#include <string>

namespace genfpk {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric parameter is outside its admissible range (non-positive D, K < 2, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on inputs it does not support (nonlinear model for
/// an exact-linear routine, odd VADA order without override, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A point or interval lies outside the domain an operation is defined on.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Discretization set up in a way that cannot be solved (singular mass matrix).
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Malformed scenario or run files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A time step could not be completed.
class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, double t, double dt)
      : Error(what + " (t=" + std::to_string(t) + ", dt=" + std::to_string(dt) + ")"),
        t_(t),
        dt_(dt) {}

  double t() const noexcept { return t_; }
  double dt() const noexcept { return dt_; }

 private:
  double t_;
  double dt_;
};

/// The numerical solution left the admissible region (blow-up, mass loss).
class DivergenceError : public StepFailure {
 public:
  using StepFailure::StepFailure;
};

}  // namespace genfpk
