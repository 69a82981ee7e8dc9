#pragma once

#include <stdexcept>
#include <string>

namespace pdempc {

/// Precondition violated by the caller (bad size, parity, parameter range).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the region where an operator is defined (e.g. a
/// resolvent evaluated on or too close to the spectrum).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computed quantity failed an internal consistency check.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The QP has no feasible point, or the dual iteration did not settle.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double max_violation)
      : std::runtime_error(what), max_violation_(max_violation) {}

  double max_violation() const noexcept { return max_violation_; }

 private:
  double max_violation_;
};

/// Configuration text could not be read or validated.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pdempc
