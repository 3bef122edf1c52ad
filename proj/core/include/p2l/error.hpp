#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace p2l {

enum class ErrorCode {
  // summarize
  EmptyMatrix,
  NegativeMass,
  NegativeComponent,
  NonPositiveEpsilon,
  // divergence / estimator
  DimensionMismatch,
  NonPositiveComponent,
  NotNormalized,
  DuplicateSourceName,
  EmptyCandidates,
  MissingReference,
  MissingSeed,
  MixedSummarizers,
  MixedExtractors,
  // calibrate
  LengthMismatch,
  DegenerateConstantInput,
  UnknownSource,
  TooFewSources,
  MissingRecord,
  ZeroDenominator,
  // io
  BadHeader,
  RaggedRow,
  NonFiniteValue,
  BadMagic,
  TruncatedFile,
  UnsupportedVersion,
  NameCollision,
  NotFound,
  InvalidName,
  IoFailure,
  MalformedInput,
  // oracle
  BadSpec,
  UnknownName,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. `code()` identifies the
/// failed contract; `line()` is set by the text readers for row-level errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<std::size_t> line = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> line_;
};

}  // namespace p2l
