#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace latarb {

// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;
// Days since the Unix epoch.
using Day = std::int64_t;

constexpr std::int64_t kSecondsPerMinute = 60;
constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::int64_t kMinutesPerDay = 1440;

// Accepts "YYYY-MM-DDTHH:MM:SSZ" and "YYYY-MM-DD HH:MM:SS" (UTC).
Timestamp parse_timestamp(std::string_view text);
// Accepts "YYYY-MM-DD".
Day parse_date(std::string_view text);

std::string format_timestamp(Timestamp ts);
std::string format_date(Day day);

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

inline Day day_of(Timestamp ts) { return floor_div(ts, kSecondsPerDay); }

// Minute bucket M covers (M*60 - 60, M*60]; a snapshot at 12:00:30 belongs to 12:01.
inline std::int64_t minute_bucket(Timestamp ts) { return -floor_div(-ts, kSecondsPerMinute); }

}  // namespace latarb
