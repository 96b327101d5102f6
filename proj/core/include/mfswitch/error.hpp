#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mfswitch {

/// Every failure raised by the library carries one of these kinds so callers
/// (and the CLI exit-code mapping) can branch without parsing messages.
enum class ErrorKind {
  // chain
  NonSquare,
  NegativeOffDiagonal,
  NonFiniteEntry,
  NotUnique,
  TimeOutOfRange,
  InvalidCombination,
  UnknownState,
  PathMismatch,
  // measure
  NonFiniteValue,
  SupportTooLarge,
  SolverStall,
  DimensionNotOne,
  // dynamics / limit / twoscale
  NonFiniteState,
  ConfigInvalid,
  CheckpointMissing,
  TimeNotOnGrid,
  RefTooSmall,
  DimensionMismatch,
  NotSymmetric,
  IndefiniteBeyondTolerance,
  // harness
  NonPositiveValue,
  TooFewPoints,
  Io,
  // cli
  ParseError,
  SchemaViolation,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace mfswitch
