#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gm3 {

enum class ErrorKind {
  InvalidParameter,
  DegenerateDenominator,
  GridTooSmall,
  GammaBranchCollision,
  QuadratureNotConverged,
  PoleAtBackground,
  NewtonDiverged,
  OutOfRange,
  RegimeMismatch,
  ComplexRoots,
  NearSingularResolvent,
  NoRootInBracket,
  BlowUpDetected,
  PositivityLost,
  StepFailure,
  Io,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::GammaBranchCollision: return "GammaBranchCollision";
    case ErrorKind::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorKind::PoleAtBackground: return "PoleAtBackground";
    case ErrorKind::NewtonDiverged: return "NewtonDiverged";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::RegimeMismatch: return "RegimeMismatch";
    case ErrorKind::ComplexRoots: return "ComplexRoots";
    case ErrorKind::NearSingularResolvent: return "NearSingularResolvent";
    case ErrorKind::NoRootInBracket: return "NoRootInBracket";
    case ErrorKind::BlowUpDetected: return "BlowUpDetected";
    case ErrorKind::PositivityLost: return "PositivityLost";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace gm3
