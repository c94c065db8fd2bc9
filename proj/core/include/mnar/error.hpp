#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mnar {

// Stable failure taxonomy. The string forms are part of the CLI contract.
enum class ErrorCode {
  kIo,
  kParse,
  kIdentifiability,
  kSeparation,
  kSingular,
  kOverflow,
  kNonconvergence,
  kUsage,
  kInternal,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mnar
