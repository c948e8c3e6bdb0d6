#include "latarb/common/numfmt.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "latarb/common/error.hpp"

namespace latarb {

std::string format_double(double value) {
    if (std::isnan(value)) return {};
    if (value == 0.0) return "0";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) fail(ErrorCode::internal, "to_chars failed");
    return std::string(buf, ptr);
}

double parse_double(const std::string& text) {
    if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) fail(ErrorCode::parse_error, "not a number: '" + text + "'");
    return value;
}

}  // namespace latarb
