#include "latarb/common/time.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

#include "latarb/common/error.hpp"

namespace latarb {
namespace {

int read_int(std::string_view text, std::size_t pos, std::size_t len) {
    if (pos + len > text.size()) fail(ErrorCode::parse_error, "truncated timestamp '" + std::string(text) + "'");
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + len, value);
    if (ec != std::errc{} || ptr != text.data() + pos + len)
        fail(ErrorCode::parse_error, "bad digits in timestamp '" + std::string(text) + "'");
    return value;
}

void expect(std::string_view text, std::size_t pos, char c) {
    if (pos >= text.size() || text[pos] != c)
        fail(ErrorCode::parse_error, "malformed timestamp '" + std::string(text) + "'");
}

Day days_from_ymd(std::string_view text, int y, int m, int d) {
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) fail(ErrorCode::parse_error, "invalid calendar date '" + std::string(text) + "'");
    return sys_days{ymd}.time_since_epoch().count();
}

}  // namespace

Day parse_date(std::string_view text) {
    if (text.size() != 10) fail(ErrorCode::parse_error, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
    expect(text, 4, '-');
    expect(text, 7, '-');
    return days_from_ymd(text, read_int(text, 0, 4), read_int(text, 5, 2), read_int(text, 8, 2));
}

Timestamp parse_timestamp(std::string_view text) {
    bool zulu = text.size() == 20 && text.back() == 'Z';
    if (!(zulu || text.size() == 19))
        fail(ErrorCode::parse_error, "expected YYYY-MM-DDTHH:MM:SSZ, got '" + std::string(text) + "'");
    if (text[10] != 'T' && text[10] != ' ') expect(text, 10, 'T');
    expect(text, 13, ':');
    expect(text, 16, ':');
    Day day = parse_date(text.substr(0, 10));
    int hh = read_int(text, 11, 2), mm = read_int(text, 14, 2), ss = read_int(text, 17, 2);
    if (hh > 23 || mm > 59 || ss > 59) fail(ErrorCode::parse_error, "time of day out of range in '" + std::string(text) + "'");
    return day * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

std::string format_date(Day day) {
    using namespace std::chrono;
    year_month_day ymd{sys_days{days{day}}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string format_timestamp(Timestamp ts) {
    Day day = day_of(ts);
    std::int64_t sod = ts - day * kSecondsPerDay;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%sT%02d:%02d:%02dZ", format_date(day).c_str(), static_cast<int>(sod / 3600),
                  static_cast<int>(sod / 60 % 60), static_cast<int>(sod % 60));
    return buf;
}

}  // namespace latarb
