#pragma once

#include <stdexcept>
#include <string>

namespace mvt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two measures (or a measure and a field) live on different domains.
class DomainMismatch : public Error {
 public:
  using Error::Error;
};

/// A numeric routine failed: non-finite values, LP breakdown, etc.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// A user-supplied map broke its declared contract (e.g. a production
/// term returned a signed measure).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Picard iteration did not reach the tolerance within the iteration cap.
class NonContraction : public Error {
 public:
  NonContraction(const std::string& what, double measured_ratio)
      : Error(what), measured_ratio_(measured_ratio) {}
  double measured_ratio() const noexcept { return measured_ratio_; }

 private:
  double measured_ratio_;
};

/// Malformed scenario/config or CSV input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvt
