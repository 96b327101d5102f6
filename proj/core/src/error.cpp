#include "mfswitch/error.hpp"

namespace mfswitch {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NonSquare: return "NonSquare";
    case ErrorKind::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case ErrorKind::NonFiniteEntry: return "NonFiniteEntry";
    case ErrorKind::NotUnique: return "NotUnique";
    case ErrorKind::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorKind::InvalidCombination: return "InvalidCombination";
    case ErrorKind::UnknownState: return "UnknownState";
    case ErrorKind::PathMismatch: return "PathMismatch";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::SupportTooLarge: return "SupportTooLarge";
    case ErrorKind::SolverStall: return "SolverStall";
    case ErrorKind::DimensionNotOne: return "DimensionNotOne";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::CheckpointMissing: return "CheckpointMissing";
    case ErrorKind::TimeNotOnGrid: return "TimeNotOnGrid";
    case ErrorKind::RefTooSmall: return "RefTooSmall";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::IndefiniteBeyondTolerance: return "IndefiniteBeyondTolerance";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::Io: return "Io";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

}  // namespace mfswitch
