#include "emscore/error.hpp"

namespace emscore {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kCorruptManifest: return "CorruptManifest";
    case ErrorCode::kOffsetOutOfBounds: return "OffsetOutOfBounds";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kUnresolvedId: return "UnresolvedId";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kMissingScore: return "MissingScore";
    case ErrorCode::kMissingIdf: return "MissingIdf";
    case ErrorCode::kNoReferences: return "NoReferences";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptyParagraph: return "EmptyParagraph";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroVector: return "ZeroVector";
    case ErrorCode::kAllZeroWeights: return "AllZeroWeights";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kDegenerateInput: return "DegenerateInput";
    case ErrorCode::kSingleSystem: return "SingleSystem";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIoError:
    case ErrorCode::kCorruptManifest:
    case ErrorCode::kOffsetOutOfBounds:
    case ErrorCode::kParseError:
    case ErrorCode::kUnresolvedId:
    case ErrorCode::kDuplicateId:
    case ErrorCode::kMissingScore:
    case ErrorCode::kMissingIdf:
    case ErrorCode::kNoReferences:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kEmptyParagraph:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace emscore
