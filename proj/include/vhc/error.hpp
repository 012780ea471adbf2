#pragma once

#include <stdexcept>
#include <string>

namespace vhc {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point outside a chart domain or non-finite evaluation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Argument shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be invertible is (numerically) singular. For VHC
/// computations this signals loss of regularity.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// ODE or quadrature failure: step underflow, guard violation, non-convergence.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside the hypotheses it relies on
/// (e.g. a flat-connection routine on a curved connection).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A derived quantity needs more nested derivatives than the field supports.
class DepthError : public Error {
 public:
  using Error::Error;
};

}  // namespace vhc
