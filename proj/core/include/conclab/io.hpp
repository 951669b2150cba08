#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace conclab {

/// 15-significant-digit decimal representation; locale-free and byte-stable,
/// which keeps repeated runs of the same seed byte-identical.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 15);
    return std::string(buf, res.ptr);
}

inline std::string format_u64(std::uint64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace conclab
