#include "garsamp/log.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <mutex>

namespace garsamp {

namespace {

LogLevel initial_level() {
    const char* env = std::getenv("GARSAMP_LOG");
    if (!env) return LogLevel::warn;
    if (!std::strcmp(env, "debug")) return LogLevel::debug;
    if (!std::strcmp(env, "info")) return LogLevel::info;
    if (!std::strcmp(env, "off")) return LogLevel::off;
    return LogLevel::warn;
}

std::atomic<LogLevel>& level_ref() {
    static std::atomic<LogLevel> level{initial_level()};
    return level;
}

std::mutex log_mutex;

}  // namespace

void set_log_level(LogLevel level) { level_ref() = level; }

LogLevel log_level() { return level_ref(); }

void log_message(LogLevel level, const std::string& msg) {
    if (level < level_ref().load() || level == LogLevel::off) return;
    static const char* names[] = {"debug", "info", "warn"};
    std::lock_guard<std::mutex> lock(log_mutex);
    std::clog << "garsamp " << names[static_cast<int>(level)] << ": " << msg << '\n';
}

}  // namespace garsamp
