#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fraudscore {

enum class ErrorKind {
  NonPositiveAmount,
  InvalidArgument,
  SeriesTooShort,
  SingularDesign,
  WrongLagCount,
  NotPositiveDefinite,
  NoProgress,
  AllRestartsFailed,
  NumericalBreakdown,
  DegenerateCount,
  ZeroVariance,
  EmptyPath,
  MissingColumn,
  UnreadableFile,
  EmptyAfterFiltering,
  RejectionOverflow,
  InsufficientLegitimateData,
  MalformedRecord,
  UnwritableFile,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace fraudscore
