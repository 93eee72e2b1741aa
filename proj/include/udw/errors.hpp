#ifndef UDW_ERRORS_HPP
#define UDW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace udw {

/// Base of every error the library raises on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A Wightman evaluation was requested outside the region where the
/// firewall correction is known (both points need v > 0).
struct DomainNotCovered : Error {
  using Error::Error;
};

/// Degenerate or inverted integration interval.
struct InvalidDomain : Error {
  using Error::Error;
};

/// Adaptive integration hit its depth or cell budget.
struct NotConverged : Error {
  using Error::Error;
};

/// The assembled state lost normalisation beyond the quadrature budget.
struct TraceViolation : Error {
  using Error::Error;
};

struct NotHermitian : Error {
  using Error::Error;
};

/// The two independent reference evaluations disagree.
struct OracleDisagreement : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace udw

#endif  // UDW_ERRORS_HPP
