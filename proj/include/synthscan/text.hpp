// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace synthscan {

/// Parses a whole token as a double; accepts a leading '+'.
inline std::optional<double> parse_real(std::string_view token) {
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    double value = 0;
    const char* end = token.data() + token.size();
    auto [p, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || p != end) return std::nullopt;
    return value;
}

/// Shortest text that reads back to the same double. Negative zero prints as 0.
inline std::string format_exact(double value) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value + 0.0);
    return std::string(buf, p);
}

/// `%.<digits>g` equivalent. Negative zero prints as 0.
inline std::string format_general(double value, int digits) {
    char buf[48];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value + 0.0, std::chars_format::general, digits);
    return std::string(buf, p);
}

} // namespace synthscan
