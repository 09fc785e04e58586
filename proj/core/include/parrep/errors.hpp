#pragma once

#include <stdexcept>
#include <string>

namespace parrep {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration (overlapping sets, bad config keys,
/// absorbing sets, malformed model files, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Argument outside the domain of an operation (bad state index, empty
/// replica list, degenerate conditioning mass, zero wall clock, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

/// Operation requires a capability the object does not have, e.g. asking a
/// sampling-only kernel for its transition matrix.
class UnsupportedError : public Error {
public:
  using Error::Error;
};

/// Numerical failure: iteration did not converge, residual too large.
class NumericError : public Error {
public:
  using Error::Error;
};

/// A configurable work budget was exhausted (rejection-sampler restarts).
class BudgetError : public Error {
public:
  using Error::Error;
};

/// Problem size exceeds a documented capacity limit.
class CapacityError : public Error {
public:
  using Error::Error;
};

/// An optional step cap was hit before a loop condition was satisfied.
class TimeoutError : public Error {
public:
  using Error::Error;
};

} // namespace parrep
