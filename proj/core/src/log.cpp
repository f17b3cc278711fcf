#include "dpmat/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace dpmat {
namespace {

LogLevel parse_env() {
  const char* v = std::getenv("DPMAT_LOG");
  if (v == nullptr) return LogLevel::warn;
  std::string s(v);
  if (s == "off") return LogLevel::off;
  if (s == "error") return LogLevel::error;
  if (s == "warn") return LogLevel::warn;
  if (s == "info") return LogLevel::info;
  if (s == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

LogLevel g_level = parse_env();
std::mutex g_mutex;

const char* tag(LogLevel lvl) {
  switch (lvl) {
    case LogLevel::error: return "E";
    case LogLevel::warn: return "W";
    case LogLevel::info: return "I";
    case LogLevel::debug: return "D";
    default: return "?";
  }
}

}  // namespace

LogLevel log_level() { return g_level; }
void set_log_level(LogLevel lvl) { g_level = lvl; }

bool log_enabled(LogLevel lvl) {
  return static_cast<int>(lvl) <= static_cast<int>(g_level);
}

void log_msg(LogLevel lvl, const std::string& msg) {
  if (!log_enabled(lvl)) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[dpmat " << tag(lvl) << "] " << msg << "\n";
}

}  // namespace dpmat
