#pragma once

#include <stdexcept>
#include <string>

namespace diffract {

/// Base class of every numerical failure raised by the library.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point handed to an oblique projection lies outside the validity tube of the interface.
class NotInTube : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The projection field is (numerically) tangent to the interface.
class TangentField : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// An iterative projection did not converge within its iteration budget.
class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A coefficient matrix lost positive definiteness (ellipticity violated).
class NotPositiveDefinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Every point of a convergence study is dominated by Monte Carlo noise.
class InsufficientResolution : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A deterministic solve broke down (singular tridiagonal system).
class UnstableConfig : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Invalid user input: experiment files, run parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace diffract
