#include "latarb/common/log.hpp"

#include <cstdio>
#include <mutex>

namespace latarb::log {
namespace {

std::mutex g_mutex;
Sink g_sink;
Level g_min = Level::info;

const char* level_name(Level level) {
    switch (level) {
        case Level::debug: return "debug";
        case Level::info: return "info";
        case Level::warn: return "warn";
        case Level::error: return "error";
    }
    return "?";
}

}  // namespace

void set_sink(Sink sink) {
    std::lock_guard lock(g_mutex);
    g_sink = std::move(sink);
}

void set_min_level(Level level) {
    std::lock_guard lock(g_mutex);
    g_min = level;
}

void write(Level level, const std::string& message) {
    std::lock_guard lock(g_mutex);
    if (level < g_min) return;
    if (g_sink) {
        g_sink(level, message);
        return;
    }
    std::fprintf(stderr, "[%s] %s\n", level_name(level), message.c_str());
}

}  // namespace latarb::log
