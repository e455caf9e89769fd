#pragma once

#include <functional>
#include <string>

namespace lipkernel {

using LogSink = std::function<void(const std::string&)>;

// Warnings go to stderr unless a sink is installed. Pass nullptr to restore.
void set_warning_sink(LogSink sink);
void log_warning(const std::string& msg);

}  // namespace lipkernel
