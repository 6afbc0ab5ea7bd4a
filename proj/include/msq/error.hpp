#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msq {

enum class ErrorKind {
  Config,
  NonElliptic,
  DerivativeMismatch,
  BracketFailure,
  GridMismatch,
  BranchMismatch,
  MissingColumns,
  InsufficientData,
  NonPositiveData,
  DegenerateFit,
  BoundaryLeak,
  NonFinite,
  NotConverged,
  PositivityViolation,
  PhaseUnderresolved,
  ExtrapolationError,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Process exit code for an uncaught error of this kind: 2 for bad input or
// configuration, 3 for a numerical abort.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitAcceptance = 4;

}  // namespace msq
