#pragma once

#include <stdexcept>
#include <string>

namespace wibg {

/// An argument lies outside the domain where the quantity is defined (alpha > 0, k < 0, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A numerical procedure (quadrature, bracketing, root finding) failed to reach its tolerance.
class NumericError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The mu scan in find_transition ended before the transition could be located.
class ScanRangeExhausted : public NumericError {
public:
  using NumericError::NumericError;
};

}  // namespace wibg
