#pragma once

#include <stdexcept>
#include <string>

namespace zdrd {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

/// The pair (A, B) has an unreachable unstable mode; the feedback
/// realization cannot be made asymptotically stationary.
struct NotStabilizable : Error {
  using Error::Error;
};

struct NonPositiveInput : Error {
  using Error::Error;
};

struct NonPositiveVariance : Error {
  using Error::Error;
};

struct NonPositiveSigma : Error {
  using Error::Error;
};

struct NoConvergence : Error {
  NoConvergence(const std::string& what, double residual_, int iterations_)
      : Error(what), residual(residual_), iterations(iterations_) {}
  double residual;
  int iterations;
};

struct DimensionTooLarge : Error {
  using Error::Error;
};

struct InvalidGp : Error {
  using Error::Error;
};

/// Internal consistency failure: a solver invariant (delta_i <= lambda_i)
/// was violated by the input solution.
struct DegenerateComponent : Error {
  using Error::Error;
};

struct MonotonicityViolation : Error {
  MonotonicityViolation(const std::string& what, double distortion_)
      : Error(what), distortion(distortion_) {}
  double distortion;
};

struct BitstreamCorrupt : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace zdrd
