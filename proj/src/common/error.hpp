#pragma once

#include <stdexcept>
#include <string>

namespace poselift {

enum class ErrorCode {
  kInvalidArgument = 1,
  kShapeMismatch,
  kIo,
  kFormat,
  kNumeric,
  kConfig,
};

const char* error_code_name(ErrorCode code);

// Every failure in the core is reported through this type; the C API maps
// `code()` onto pl_status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace poselift
