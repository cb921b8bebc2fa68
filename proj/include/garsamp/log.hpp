#pragma once

#include <string>

namespace garsamp {

enum class LogLevel { debug = 0, info = 1, warn = 2, off = 3 };

// Messages at or above the level go to stderr. Default warn; the
// GARSAMP_LOG environment variable (debug|info|warn|off) overrides it.
void set_log_level(LogLevel level);
LogLevel log_level();
void log_message(LogLevel level, const std::string& msg);

}  // namespace garsamp
