#include "tnt/error.hpp"

namespace tnt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyResponse: return "EmptyResponse";
    case ErrorKind::kNoThinkClose: return "NoThinkClose";
    case ErrorKind::kWrongMode: return "WrongMode";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kNonFiniteGradient: return "NonFiniteGradient";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kNonPositiveTokens: return "NonPositiveTokens";
    case ErrorKind::kMissingBudget: return "MissingBudget";
    case ErrorKind::kUnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kParse: return "ParseError";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kThresholdExceeded: return "ThresholdExceeded";
  }
  return "Unknown";
}

}  // namespace tnt
