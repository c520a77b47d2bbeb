#pragma once

#include <string>

namespace gpsinfer {

// Severity levels. TRACE < DEBUG < INFO < WARN. Only the first three are valid
// configuration thresholds; WARN records are always at or above any threshold.
enum class LogLevel { trace = 0, debug = 1, info = 2, warn = 3 };

struct LogConfig {
  LogLevel level = LogLevel::info;  // minimum severity that gets emitted
  std::string file_path;            // empty -> stderr
};

// Installs the global sink/threshold. Thread-safe; replaces any previous config.
void configure_logging(const LogConfig& config);

// Current threshold (useful to skip building expensive messages).
LogLevel log_threshold();

// Emits "<ISO-8601 UTC timestamp> <LEVEL> <message>" if level passes the threshold.
void log_message(LogLevel level, const std::string& message);

inline void log_trace(const std::string& m) { log_message(LogLevel::trace, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::warn, m); }

const char* log_level_name(LogLevel level);

// Parses "TRACE" / "DEBUG" / "INFO" (case-insensitive). Throws std::invalid_argument.
LogLevel parse_log_level(const std::string& text);

}  // namespace gpsinfer
