#pragma once

#include <stdexcept>
#include <string>

namespace entpdf {

// Base for every library error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user-supplied data: malformed files, invalid matrices, out-of-range
// parameters.  CLI maps these to exit code 2.
struct InputError : Error {
  using Error::Error;
};

struct InvalidStateError : InputError {
  using InputError::InputError;
};

struct DomainError : InputError {
  using InputError::InputError;
};

// Internal numerical trouble: non-convergence, failed canonicalization,
// quadrature failure.  CLI maps these to exit code 3.
struct NumericalError : Error {
  NumericalError(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

struct CanonicalizationError : NumericalError {
  using NumericalError::NumericalError;
};

struct IntegrationError : NumericalError {
  using NumericalError::NumericalError;
};

// Requested marker set / extras disagree with each other.  CLI exit code 1.
struct InconsistencyError : Error {
  InconsistencyError(const std::string& marker, const std::string& what)
      : Error(what), marker(marker) {}
  std::string marker;
};

// Cached resource missing and regeneration disabled.
struct UnavailableError : Error {
  using Error::Error;
};

}  // namespace entpdf
