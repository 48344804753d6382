#pragma once

#include <string>

namespace dapspp {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Level comes from the DAPSPP_LOG environment variable (error|info|debug,
// default error) and can be overridden programmatically.
LogLevel log_level();
void set_log_level(LogLevel level);
bool set_log_level(const std::string& name);

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace dapspp
