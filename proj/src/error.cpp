#include "frd/error.hpp"

#include <sstream>

namespace frd {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config error";
    case ErrorKind::Precondition: return "precondition error";
    case ErrorKind::DomainParameter: return "domain-parameter error";
    case ErrorKind::SelfContact: return "self-contact error";
    case ErrorKind::ResourceLimit: return "resource-limit error";
    case ErrorKind::Geometry: return "geometry error";
    case ErrorKind::Consistency: return "consistency error";
    case ErrorKind::Hypothesis: return "hypothesis-violation error";
    case ErrorKind::Io: return "io error";
    case ErrorKind::Assembly: return "assembly error";
    case ErrorKind::Solver: return "solver error";
    case ErrorKind::Step: return "step error";
    case ErrorKind::NonConvergence: return "non-convergence error";
    case ErrorKind::DegenerateInput: return "degenerate-input error";
    case ErrorKind::Basis: return "basis error";
    case ErrorKind::BlowUp: return "blow-up";
  }
  return "error";
}

int exit_code(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::BlowUp:
      return 3;
    case ErrorKind::Assembly:
    case ErrorKind::Solver:
    case ErrorKind::Step:
    case ErrorKind::NonConvergence:
    case ErrorKind::Basis:
      return 4;
    default:
      return 2;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

namespace {
std::string blowup_message(double t, double linf) {
  std::ostringstream os;
  os.precision(17);
  os << "sup norm " << linf << " exceeded the blow-up guard; last finite time " << t;
  return os.str();
}
}  // namespace

BlowUpError::BlowUpError(double last_finite_time, double linf)
    : Error(ErrorKind::BlowUp, blowup_message(last_finite_time, linf)), last_time_(last_finite_time) {}

}  // namespace frd
