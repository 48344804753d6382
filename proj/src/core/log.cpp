#include "core/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace dapspp {

namespace {

std::atomic<int> g_level{-1};
std::mutex g_stream_mutex;

int level_from_env() {
  const char* env = std::getenv("DAPSPP_LOG");
  if (!env) return static_cast<int>(LogLevel::Error);
  std::string s(env);
  if (s == "debug") return static_cast<int>(LogLevel::Debug);
  if (s == "info") return static_cast<int>(LogLevel::Info);
  return static_cast<int>(LogLevel::Error);
}

void emit(LogLevel level, const char* tag, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::lock_guard<std::mutex> lock(g_stream_mutex);
  std::cerr << "[dapspp " << tag << "] " << msg << '\n';
}

}  // namespace

LogLevel log_level() {
  int v = g_level.load(std::memory_order_relaxed);
  if (v < 0) {
    v = level_from_env();
    g_level.store(v, std::memory_order_relaxed);
  }
  return static_cast<LogLevel>(v);
}

void set_log_level(LogLevel level) {
  g_level.store(static_cast<int>(level), std::memory_order_relaxed);
}

bool set_log_level(const std::string& name) {
  if (name == "error") {
    set_log_level(LogLevel::Error);
  } else if (name == "info") {
    set_log_level(LogLevel::Info);
  } else if (name == "debug") {
    set_log_level(LogLevel::Debug);
  } else {
    return false;
  }
  return true;
}

void log_error(const std::string& msg) { emit(LogLevel::Error, "error", msg); }
void log_info(const std::string& msg) { emit(LogLevel::Info, "info", msg); }
void log_debug(const std::string& msg) { emit(LogLevel::Debug, "debug", msg); }

}  // namespace dapspp
