#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>

// Minimal stderr logger gated by the HDDPC_LOG_LEVEL environment variable
// (error, warn, info, debug). Default level is warn.

namespace hddpc::log {

enum class Level : int { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline Level threshold() {
  static Level lvl = [] {
    const char* env = std::getenv("HDDPC_LOG_LEVEL");
    if (!env) return Level::Warn;
    if (std::strcmp(env, "error") == 0) return Level::Error;
    if (std::strcmp(env, "warn") == 0) return Level::Warn;
    if (std::strcmp(env, "info") == 0) return Level::Info;
    if (std::strcmp(env, "debug") == 0) return Level::Debug;
    return Level::Warn;
  }();
  return lvl;
}

template <typename... Args>
inline void emit(Level lvl, const char* tag, const char* fmt, Args... args) {
  if (static_cast<int>(lvl) > static_cast<int>(threshold())) return;
  std::fprintf(stderr, "[%s] ", tag);
  std::fprintf(stderr, fmt, args...);
  std::fputc('\n', stderr);
}

template <typename... Args>
inline void error(const char* fmt, Args... args) {
  emit(Level::Error, "error", fmt, args...);
}
template <typename... Args>
inline void warn(const char* fmt, Args... args) {
  emit(Level::Warn, "warn", fmt, args...);
}
template <typename... Args>
inline void info(const char* fmt, Args... args) {
  emit(Level::Info, "info", fmt, args...);
}
template <typename... Args>
inline void debug(const char* fmt, Args... args) {
  emit(Level::Debug, "debug", fmt, args...);
}

}  // namespace hddpc::log
