#pragma once

#include <bit>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>

#include "mfuq/errors.hpp"

namespace mfuq {

/// Bit-exact text encoding of a double: 16 lowercase hex digits of its IEEE-754 image.
inline std::string to_hex(double x) {
    static constexpr char digits[] = "0123456789abcdef";
    auto bits = std::bit_cast<std::uint64_t>(x);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[bits & 0xfu];
        bits >>= 4;
    }
    return out;
}

inline double from_hex(std::string_view s) {
    if (s.size() != 16) {
        throw FormatError("hex real must have 16 digits, got '" + std::string(s) + "'");
    }
    std::uint64_t bits = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), bits, 16);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw FormatError("malformed hex real '" + std::string(s) + "'");
    }
    return std::bit_cast<double>(bits);
}

/// Shortest round-trip decimal representation.
inline std::string format_real(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

}  // namespace mfuq
