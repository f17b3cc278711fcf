#pragma once

// Minimal stderr logger. Verbosity comes from the DPMAT_LOG environment
// variable: off, error, warn, info, debug. Default is warn.

#include <string>

namespace dpmat {

enum class LogLevel : int { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

LogLevel log_level();
void set_log_level(LogLevel lvl);
bool log_enabled(LogLevel lvl);
void log_msg(LogLevel lvl, const std::string& msg);

inline void log_error(const std::string& msg) { log_msg(LogLevel::error, msg); }
inline void log_warn(const std::string& msg) { log_msg(LogLevel::warn, msg); }
inline void log_info(const std::string& msg) { log_msg(LogLevel::info, msg); }
inline void log_debug(const std::string& msg) { log_msg(LogLevel::debug, msg); }

}  // namespace dpmat
