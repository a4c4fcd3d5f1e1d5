#pragma once

#include <functional>
#include <string_view>

namespace copilot {

enum class LogLevel { debug, info, warn, error };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Replaces the process-wide sink; an empty sink restores the default, which
// writes info and above to stderr.
void set_log_sink(LogSink sink);
void log(LogLevel level, std::string_view message);

}  // namespace copilot
