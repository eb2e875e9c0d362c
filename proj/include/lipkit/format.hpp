#ifndef LIPKIT_FORMAT_HPP
#define LIPKIT_FORMAT_HPP

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace lipkit {

/// Shortest decimal string that parses back to exactly `x`. Signed zero prints as "0".
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

} // namespace lipkit

#endif
