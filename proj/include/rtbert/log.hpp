#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace rtbert {

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3, Off = 4 };

inline std::string_view to_string(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
    case LogLevel::Off: return "off";
  }
  return "?";
}

inline LogLevel parse_log_level(std::string_view s) {
  if (s == "debug") return LogLevel::Debug;
  if (s == "info") return LogLevel::Info;
  if (s == "warn" || s == "warning") return LogLevel::Warn;
  if (s == "error") return LogLevel::Error;
  if (s == "off") return LogLevel::Off;
  throw std::invalid_argument("unknown log level: " + std::string(s));
}

using LogSink = std::function<void(LogLevel, std::string_view stage, std::string_view message)>;

namespace detail {

struct LogState {
  LogLevel threshold = LogLevel::Info;
  LogSink sink;
  std::mutex mutex;
};

inline LogState& log_state() {
  static LogState state;
  return state;
}

inline void default_sink(LogLevel level, std::string_view stage, std::string_view message) {
  std::cerr << "level=" << to_string(level) << " stage=" << stage << " msg=\"";
  for (char c : message) {
    if (c == '"' || c == '\\') std::cerr << '\\';
    std::cerr << (c == '\n' ? ' ' : c);
  }
  std::cerr << "\"\n";
}

}  // namespace detail

inline void set_log_level(LogLevel level) { detail::log_state().threshold = level; }
inline LogLevel log_level() { return detail::log_state().threshold; }

/// Structured log line to stderr: `level=<l> stage=<s> msg="<m>"`.
inline void log(LogLevel level, std::string_view stage, std::string_view message) {
  auto& st = detail::log_state();
  std::lock_guard lock(st.mutex);
  if (st.sink) {
    st.sink(level, stage, message);
    return;
  }
  if (level < st.threshold) return;
  detail::default_sink(level, stage, message);
}

inline void log_info(std::string_view stage, std::string_view message) { log(LogLevel::Info, stage, message); }
inline void log_warn(std::string_view stage, std::string_view message) { log(LogLevel::Warn, stage, message); }
inline void log_debug(std::string_view stage, std::string_view message) { log(LogLevel::Debug, stage, message); }

/// Redirects every log line to `sink` for the lifetime of the object (tests).
class ScopedLogSink {
 public:
  explicit ScopedLogSink(LogSink sink) {
    auto& st = detail::log_state();
    std::lock_guard lock(st.mutex);
    previous_ = std::move(st.sink);
    st.sink = std::move(sink);
  }
  ~ScopedLogSink() {
    auto& st = detail::log_state();
    std::lock_guard lock(st.mutex);
    st.sink = std::move(previous_);
  }
  ScopedLogSink(const ScopedLogSink&) = delete;
  ScopedLogSink& operator=(const ScopedLogSink&) = delete;

 private:
  LogSink previous_;
};

}  // namespace rtbert
