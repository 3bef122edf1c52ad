#include "p2l/error.hpp"

namespace p2l {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyMatrix: return "EmptyMatrix";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::NegativeComponent: return "NegativeComponent";
    case ErrorCode::NonPositiveEpsilon: return "NonPositiveEpsilon";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveComponent: return "NonPositiveComponent";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::DuplicateSourceName: return "DuplicateSourceName";
    case ErrorCode::EmptyCandidates: return "EmptyCandidates";
    case ErrorCode::MissingReference: return "MissingReference";
    case ErrorCode::MissingSeed: return "MissingSeed";
    case ErrorCode::MixedSummarizers: return "MixedSummarizers";
    case ErrorCode::MixedExtractors: return "MixedExtractors";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DegenerateConstantInput: return "DegenerateConstantInput";
    case ErrorCode::UnknownSource: return "UnknownSource";
    case ErrorCode::TooFewSources: return "TooFewSources";
    case ErrorCode::MissingRecord: return "MissingRecord";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::NameCollision: return "NameCollision";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::InvalidName: return "InvalidName";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MalformedInput: return "MalformedInput";
    case ErrorCode::BadSpec: return "BadSpec";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorCode code, const std::string& what, std::optional<std::size_t> line) {
  std::string msg{to_string(code)};
  if (line) msg += " (line " + std::to_string(*line) + ")";
  if (!what.empty()) msg += ": " + what;
  return msg;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& what, std::optional<std::size_t> line)
    : std::runtime_error(decorate(code, what, line)), code_(code), line_(line) {}

}  // namespace p2l
