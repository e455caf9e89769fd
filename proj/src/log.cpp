#include "lipkernel/log.hpp"

#include <iostream>
#include <mutex>

namespace lipkernel {

namespace {
std::mutex g_mu;
LogSink g_sink;
}  // namespace

void set_warning_sink(LogSink sink) {
    std::lock_guard<std::mutex> lk(g_mu);
    g_sink = std::move(sink);
}

void log_warning(const std::string& msg) {
    std::lock_guard<std::mutex> lk(g_mu);
    if (g_sink)
        g_sink(msg);
    else
        std::cerr << "warning: " << msg << '\n';
}

}  // namespace lipkernel
