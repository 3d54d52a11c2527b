#include "bayesqa/error.hpp"

namespace bayesqa {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::UnknownState: return "UnknownState";
    case ErrorKind::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorKind::OverlappingBindings: return "OverlappingBindings";
    case ErrorKind::ZeroProbabilityEvidence: return "ZeroProbabilityEvidence";
    case ErrorKind::InternalConsistency: return "InternalConsistency";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UnsupportedFragment: return "UnsupportedFragment";
    case ErrorKind::UnknownClause: return "UnknownClause";
    case ErrorKind::EnumerationBound: return "EnumerationBound";
    case ErrorKind::UnstratifiedNegation: return "UnstratifiedNegation";
    case ErrorKind::UnrepresentableName: return "UnrepresentableName";
    case ErrorKind::InvalidProbability: return "InvalidProbability";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::UnknownPhrase: return "UnknownPhrase";
    case ErrorKind::UnsatisfiableEvidence: return "UnsatisfiableEvidence";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::DuplicatePrediction: return "DuplicatePrediction";
    case ErrorKind::UnknownInstance: return "UnknownInstance";
    case ErrorKind::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace bayesqa
