#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace emscore {

enum class ErrorCode {
  // Input resolution: files, parsing, identifiers.
  kIoError,
  kCorruptManifest,
  kOffsetOutOfBounds,
  kParseError,
  kUnresolvedId,
  kDuplicateId,
  kMissingScore,
  kMissingIdf,
  kNoReferences,
  kEmptyCorpus,
  kEmptyParagraph,
  // Computation.
  kDimensionMismatch,
  kZeroVector,
  kAllZeroWeights,
  kLengthMismatch,
  kDegenerateInput,
  kSingleSystem,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by unreadable or unresolvable inputs, as opposed to
/// failures of the numerical computation itself.
bool is_input_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace emscore
