#include "coordfeas/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace coordfeas {

namespace {

LogLevel parse_level() {
  const char* env = std::getenv("COORDFEAS_LOG");
  if (env == nullptr) return LogLevel::Warn;
  if (std::strcmp(env, "error") == 0) return LogLevel::Error;
  if (std::strcmp(env, "warn") == 0) return LogLevel::Warn;
  if (std::strcmp(env, "info") == 0) return LogLevel::Info;
  if (std::strcmp(env, "debug") == 0) return LogLevel::Debug;
  std::fprintf(stderr, "[coordfeas] warn: unknown COORDFEAS_LOG value '%s'\n", env);
  return LogLevel::Warn;
}

const char* level_name(LogLevel level) {
  switch (level) {
    case LogLevel::Error: return "error";
    case LogLevel::Warn: return "warn";
    case LogLevel::Info: return "info";
    case LogLevel::Debug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() {
  static const LogLevel level = parse_level();
  return level;
}

void log_message(LogLevel level, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::fprintf(stderr, "[coordfeas] %s: %s\n", level_name(level), message.c_str());
}

}  // namespace coordfeas
