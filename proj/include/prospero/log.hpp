#pragma once

#include <string>

namespace prospero {

enum class LogLevel { Quiet, Warn, Info };

void set_log_level(LogLevel level);
LogLevel log_level();

void log_warn(const std::string& message);
void log_info(const std::string& message);

}  // namespace prospero
