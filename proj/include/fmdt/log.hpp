#pragma once

#include <cstdio>

// Minimal stderr logger. Verbosity comes from the FMDT_LOG environment
// variable: error, warn (default), info, debug.
namespace fmdt::log {

enum class Level { error = 0, warn = 1, info = 2, debug = 3 };

Level threshold();

bool enabled(Level lvl);

void vlog(Level lvl, const char* fmt, ...)
#if defined(__GNUC__)
    __attribute__((format(printf, 2, 3)))
#endif
    ;

}  // namespace fmdt::log

#define FMDT_LOG_ERROR(...) ::fmdt::log::vlog(::fmdt::log::Level::error, __VA_ARGS__)
#define FMDT_LOG_WARN(...) ::fmdt::log::vlog(::fmdt::log::Level::warn, __VA_ARGS__)
#define FMDT_LOG_INFO(...) ::fmdt::log::vlog(::fmdt::log::Level::info, __VA_ARGS__)
#define FMDT_LOG_DEBUG(...) ::fmdt::log::vlog(::fmdt::log::Level::debug, __VA_ARGS__)
