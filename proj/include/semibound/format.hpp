#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace semibound {

/// Shortest round-trip decimal form of x.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    if (res.ec != std::errc{}) return std::to_string(x);
    return std::string(buf, res.ptr);
}

/// Decimal form of exp(log_value), valid far outside the double range.
inline std::string format_from_log(double log_value) {
    if (std::isnan(log_value)) return "nan";
    if (log_value == -INFINITY) return "0";
    if (log_value == INFINITY) return "inf";
    if (std::abs(log_value) < 700.0) return format_double(std::exp(log_value));
    const double l10 = log_value / std::log(10.0);
    double exponent = std::floor(l10);
    double mantissa = std::pow(10.0, l10 - exponent);
    if (mantissa >= 10.0) {
        mantissa /= 10.0;
        exponent += 1.0;
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, mantissa, std::chars_format::fixed, 12);
    std::string m(buf, res.ptr);
    while (!m.empty() && m.back() == '0') m.pop_back();
    if (!m.empty() && m.back() == '.') m.pop_back();
    return m + "e" + format_double(exponent);
}

} // namespace semibound
