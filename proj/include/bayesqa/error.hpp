#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bayesqa {

/// Names of the domain error cases. Every message produced by `Error`
/// starts with the kind name so callers can match on it textually.
enum class ErrorKind {
  ParseError,
  ValidationError,
  CycleDetected,
  UnknownVariable,
  UnknownState,
  IncompleteAssignment,
  OverlappingBindings,
  ZeroProbabilityEvidence,
  InternalConsistency,
  SyntaxError,
  UnsupportedFragment,
  UnknownClause,
  EnumerationBound,
  UnstratifiedNegation,
  UnrepresentableName,
  InvalidProbability,
  InvalidDistribution,
  UnknownPhrase,
  UnsatisfiableEvidence,
  InvalidArgument,
  DuplicatePrediction,
  UnknownInstance,
  IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind),
        detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace bayesqa
