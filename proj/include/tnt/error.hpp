#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tnt {

enum class ErrorKind {
  kEmptyResponse,
  kNoThinkClose,
  kWrongMode,
  kLengthMismatch,
  kShapeMismatch,
  kNonFiniteGradient,
  kInvalidArgument,
  kNonPositiveTokens,
  kMissingBudget,
  kUnsupportedFormat,
  kCorruptCheckpoint,
  kIo,
  kParse,
  kConfig,
  kThresholdExceeded,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported through this type; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tnt
