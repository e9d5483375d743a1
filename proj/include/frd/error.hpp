#pragma once

#include <stdexcept>
#include <string>

namespace frd {

enum class ErrorKind {
  Config,
  Precondition,
  DomainParameter,
  SelfContact,
  ResourceLimit,
  Geometry,
  Consistency,
  Hypothesis,
  Io,
  Assembly,
  Solver,
  Step,
  NonConvergence,
  DegenerateInput,
  Basis,
  BlowUp,
};

const char* to_string(ErrorKind kind) noexcept;

/// Process exit status for an error category: 2 for configuration and
/// precondition problems, 3 for blow-up, 4 for numerical failures.
int exit_code(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the "<kind>: " prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

/// Raised when the L-infinity norm of the state leaves the finite regime.
class BlowUpError : public Error {
 public:
  BlowUpError(double last_finite_time, double linf);
  double last_finite_time() const noexcept { return last_time_; }

 private:
  double last_time_;
};

}  // namespace frd
