#pragma once

#include <charconv>
#include <string>

namespace dlmi {

/// Shortest round-trip decimal form; stable across runs and locales.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace dlmi
