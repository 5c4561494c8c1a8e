#include "prospero/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace prospero {

namespace {
std::atomic<LogLevel> g_level{LogLevel::Warn};
std::mutex g_mutex;
}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

void log_warn(const std::string& message) {
  if (g_level < LogLevel::Warn) return;
  std::lock_guard lock(g_mutex);
  std::cerr << "warning: " << message << '\n';
}

void log_info(const std::string& message) {
  if (g_level < LogLevel::Info) return;
  std::lock_guard lock(g_mutex);
  std::cerr << message << '\n';
}

}  // namespace prospero
