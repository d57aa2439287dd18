#pragma once

#include <stdexcept>
#include <string>

namespace aclab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid grid, physics or run configuration. The CLI maps it to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A time step larger than the explicit stability bound was requested.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf or a maximum-principle violation during time stepping (exit code 3).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// API misuse: windows outside a record, undeclared test-field flags, etc.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Front tracking lost resolution (collapsed segments).
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Contact angle degenerated to tangential contact.
class ContactSingularityError : public Error {
 public:
  using Error::Error;
};

/// Closed-form solution queried past extinction.
class ExtinctionError : public Error {
 public:
  using Error::Error;
};

}  // namespace aclab
