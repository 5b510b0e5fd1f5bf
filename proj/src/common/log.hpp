#pragma once

#include <string>

namespace poselift {

enum class LogLevel { kDebug, kInfo, kWarning, kError };

// Lines go to stderr as "[poselift] LEVEL message". Default threshold is
// kWarning; POSELIFT_LOG=debug|info|warning|error overrides it.
void log(LogLevel level, const std::string& message);
void set_log_level(LogLevel level);

}  // namespace poselift
