#pragma once

#include <stdexcept>
#include <string>

namespace uwbsim {

/// Base class for all errors raised by the toolkit.
class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration or validation problem detected before a run starts.
class ConfigError : public SimError {
 public:
  using SimError::SimError;
};

/// A required anchor file is missing.
class NotProvisionedError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Malformed text input (anchor file, command line, scenario file).
class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// A TWR exchange violating its timestamp ordering invariants.
class MalformedExchangeError : public SimError {
 public:
  using SimError::SimError;
};

/// Degenerate anchor geometry (coplanar/collinear or coincident with the tag).
class GeometryError : public SimError {
 public:
  using SimError::SimError;
};

/// Iterative solver failed to converge.
class NoFixError : public SimError {
 public:
  using SimError::SimError;
};

/// Filter covariance lost positive semi-definiteness.
class FilterDivergenceError : public SimError {
 public:
  using SimError::SimError;
};

/// Too few samples for the requested statistic.
class InsufficientDataError : public SimError {
 public:
  using SimError::SimError;
};

/// Rank-deficient covariance, no well-defined ellipse.
class DegenerateEllipseError : public SimError {
 public:
  using SimError::SimError;
};

/// File system failure while reading or writing results.
class IoError : public SimError {
 public:
  using SimError::SimError;
};

}  // namespace uwbsim
