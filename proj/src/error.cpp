#include "msq/error.hpp"

namespace msq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::NonElliptic: return "NonElliptic";
    case ErrorKind::DerivativeMismatch: return "DerivativeMismatch";
    case ErrorKind::BracketFailure: return "BracketFailure";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::BranchMismatch: return "BranchMismatch";
    case ErrorKind::MissingColumns: return "MissingColumns";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::NonPositiveData: return "NonPositiveData";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::BoundaryLeak: return "BoundaryLeak";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NotConverged: return "NotConverged";
    case ErrorKind::PositivityViolation: return "PositivityViolation";
    case ErrorKind::PhaseUnderresolved: return "PhaseUnderresolved";
    case ErrorKind::ExtrapolationError: return "ExtrapolationError";
    case ErrorKind::Io: return "IoError";
  }
  return "Unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::NonElliptic:
    case ErrorKind::DerivativeMismatch:
    case ErrorKind::BracketFailure:
    case ErrorKind::GridMismatch:
    case ErrorKind::BranchMismatch:
    case ErrorKind::MissingColumns:
    case ErrorKind::Io:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace msq
