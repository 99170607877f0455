#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

// Logging gated by MIXSEL_LOG in {error, info, debug}; default error.

namespace mixsel {

inline int log_level() {
  static const int level = [] {
    const char* env = std::getenv("MIXSEL_LOG");
    if (env == nullptr) return 0;
    const std::string s(env);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

inline void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

}  // namespace mixsel
