#include "common/error.hpp"

namespace poselift {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kShapeMismatch: return "shape_mismatch";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kNumeric: return "numeric";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace poselift
