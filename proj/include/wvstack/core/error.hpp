#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wvstack {

enum class Errc {
  // catalog
  MalformedManifest,
  MissingField,
  InvalidFootprint,
  InvalidPolygon,
  // geometry
  InvalidOrbit,
  InvalidGeometry,
  TimeOutOfRange,
  NoConvergence,
  NoIntersection,
  GridDisjoint,
  // coregistration
  FlatChip,
  PeakAtBorder,
  InsufficientOverlap,
  AllWindowsRejected,
  DisconnectedNetwork,
  SingularSystem,
  InvalidIncidence,
  // stack
  StackTooSmall,
  MemberNotInStack,
  // insar
  GridMismatch,
  EmptyStack,
  DisconnectedEpochs,
  UnwrapFailure,
  // simulator
  InvalidSpec,
  // plumbing
  Io,
  Usage,
};

enum class ErrorCategory { Usage, Data, Numerical };

constexpr std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::MalformedManifest: return "MalformedManifest";
    case Errc::MissingField: return "MissingField";
    case Errc::InvalidFootprint: return "InvalidFootprint";
    case Errc::InvalidPolygon: return "InvalidPolygon";
    case Errc::InvalidOrbit: return "InvalidOrbit";
    case Errc::InvalidGeometry: return "InvalidGeometry";
    case Errc::TimeOutOfRange: return "TimeOutOfRange";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NoIntersection: return "NoIntersection";
    case Errc::GridDisjoint: return "GridDisjoint";
    case Errc::FlatChip: return "FlatChip";
    case Errc::PeakAtBorder: return "PeakAtBorder";
    case Errc::InsufficientOverlap: return "InsufficientOverlap";
    case Errc::AllWindowsRejected: return "AllWindowsRejected";
    case Errc::DisconnectedNetwork: return "DisconnectedNetwork";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::InvalidIncidence: return "InvalidIncidence";
    case Errc::StackTooSmall: return "StackTooSmall";
    case Errc::MemberNotInStack: return "MemberNotInStack";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::EmptyStack: return "EmptyStack";
    case Errc::DisconnectedEpochs: return "DisconnectedEpochs";
    case Errc::UnwrapFailure: return "UnwrapFailure";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::Io: return "Io";
    case Errc::Usage: return "Usage";
  }
  return "Unknown";
}

constexpr ErrorCategory errc_category(Errc c) {
  switch (c) {
    case Errc::Usage:
      return ErrorCategory::Usage;
    case Errc::NoConvergence:
    case Errc::NoIntersection:
    case Errc::FlatChip:
    case Errc::PeakAtBorder:
    case Errc::AllWindowsRejected:
    case Errc::DisconnectedNetwork:
    case Errc::SingularSystem:
    case Errc::InvalidIncidence:
    case Errc::DisconnectedEpochs:
    case Errc::UnwrapFailure:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Data;
  }
}

/// Process exit status for each error category (0 is success).
constexpr int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Numerical: return 4;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return errc_category(code_); }

 private:
  Errc code_;
};

}  // namespace wvstack
