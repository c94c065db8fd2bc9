#include "mnar/error.hpp"

namespace mnar {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IO";
    case ErrorCode::kParse: return "PARSE";
    case ErrorCode::kIdentifiability: return "IDENTIFIABILITY";
    case ErrorCode::kSeparation: return "SEPARATION";
    case ErrorCode::kSingular: return "SINGULAR";
    case ErrorCode::kOverflow: return "OVERFLOW";
    case ErrorCode::kNonconvergence: return "NONCONVERGENCE";
    case ErrorCode::kUsage: return "USAGE";
    case ErrorCode::kInternal: return "INTERNAL";
  }
  return "INTERNAL";
}

}  // namespace mnar
