#include "gpsinfer/logging.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>

#include "gpsinfer/errors.hpp"

namespace gpsinfer {

namespace {

struct LoggerState {
  std::mutex mutex;
  LogLevel level = LogLevel::info;
  std::ofstream file;  // open iff a file sink was configured
};

LoggerState& state() {
  static LoggerState s;
  return s;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void configure_logging(const LogConfig& config) {
  LoggerState& s = state();
  std::lock_guard<std::mutex> lock(s.mutex);
  s.level = config.level;
  if (s.file.is_open()) s.file.close();
  if (!config.file_path.empty()) {
    s.file.open(config.file_path, std::ios::app);
    if (!s.file) {
      throw IoError("cannot open log file: " + config.file_path);
    }
  }
}

LogLevel log_threshold() {
  LoggerState& s = state();
  std::lock_guard<std::mutex> lock(s.mutex);
  return s.level;
}

void log_message(LogLevel level, const std::string& message) {
  LoggerState& s = state();
  std::lock_guard<std::mutex> lock(s.mutex);
  if (static_cast<int>(level) < static_cast<int>(s.level)) return;
  const std::string line =
      utc_timestamp() + " " + log_level_name(level) + " " + message + "\n";
  if (s.file.is_open()) {
    s.file << line;
    s.file.flush();
  } else {
    std::cerr << line;
  }
}

const char* log_level_name(LogLevel level) {
  switch (level) {
    case LogLevel::trace: return "TRACE";
    case LogLevel::debug: return "DEBUG";
    case LogLevel::info: return "INFO";
    case LogLevel::warn: return "WARN";
  }
  return "INFO";
}

LogLevel parse_log_level(const std::string& text) {
  std::string up;
  for (char c : text) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "TRACE") return LogLevel::trace;
  if (up == "DEBUG") return LogLevel::debug;
  if (up == "INFO") return LogLevel::info;
  throw std::invalid_argument("unknown log level: " + text);
}

}  // namespace gpsinfer
