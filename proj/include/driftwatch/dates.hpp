#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "driftwatch/common.hpp"

namespace driftwatch {

// Timestamps are UTC seconds since the epoch at second resolution; days are
// counted from 1970-01-01 in the proleptic Gregorian calendar.

struct CivilDate {
    int year = 1970;
    unsigned month = 1;
    unsigned day = 1;
};

inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline CivilDate civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2)), m, d};
}

inline bool is_leap_year(int y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline unsigned days_in_month(int y, unsigned m) {
    static constexpr unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) return 29;
    return lengths[m - 1];
}

inline std::int64_t day_of_timestamp(std::int64_t ts) {
    // floor division; timestamps before the epoch round toward -inf
    std::int64_t d = ts / 86400;
    if (ts % 86400 < 0) --d;
    return d;
}

inline std::string format_day(std::int64_t day) {
    const CivilDate c = civil_from_days(day);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

inline std::string format_timestamp(std::int64_t ts) {
    const std::int64_t day = day_of_timestamp(ts);
    std::int64_t sec = ts - day * 86400;
    const CivilDate c = civil_from_days(day);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", c.year, c.month, c.day,
                  static_cast<int>(sec / 3600), static_cast<int>(sec % 3600 / 60),
                  static_cast<int>(sec % 60));
    return buf;
}

namespace detail {

inline bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, long& out) {
    if (pos + len > s.size()) return false;
    long v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = s[i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

} // namespace detail

/// Parses "YYYY-MM-DD" into a day number.
inline std::int64_t parse_day(std::string_view s) {
    long y, m, d;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
        !detail::parse_fixed_uint(s, 0, 4, y) || !detail::parse_fixed_uint(s, 5, 2, m) ||
        !detail::parse_fixed_uint(s, 8, 2, d)) {
        fail("invalid date '" + std::string(s) + "' (expected YYYY-MM-DD)");
    }
    if (m < 1 || m > 12 || d < 1 ||
        d > static_cast<long>(days_in_month(static_cast<int>(y), static_cast<unsigned>(m)))) {
        fail("invalid date '" + std::string(s) + "' (out-of-range field)");
    }
    return days_from_civil(static_cast<int>(y), static_cast<unsigned>(m),
                           static_cast<unsigned>(d));
}

/// Parses an RFC 3339 timestamp ("2020-03-01T12:00:00Z", optional fractional
/// seconds and numeric offsets) into UTC seconds since the epoch. Fractional
/// seconds are truncated.
inline std::int64_t parse_timestamp(std::string_view s) {
    const auto bad = [&](const char* why) -> std::int64_t {
        fail("invalid timestamp '" + std::string(s) + "' (" + why + ")");
    };
    long y, mo, d, h, mi, se;
    if (s.size() < 20 || s[4] != '-' || s[7] != '-') return bad("expected RFC 3339");
    const char sep = s[10];
    if (sep != 'T' && sep != 't' && sep != ' ') return bad("expected 'T' date/time separator");
    if (s[13] != ':' || s[16] != ':') return bad("expected HH:MM:SS");
    if (!detail::parse_fixed_uint(s, 0, 4, y) || !detail::parse_fixed_uint(s, 5, 2, mo) ||
        !detail::parse_fixed_uint(s, 8, 2, d) || !detail::parse_fixed_uint(s, 11, 2, h) ||
        !detail::parse_fixed_uint(s, 14, 2, mi) || !detail::parse_fixed_uint(s, 17, 2, se)) {
        return bad("non-numeric field");
    }
    if (mo < 1 || mo > 12 || d < 1 ||
        d > static_cast<long>(days_in_month(static_cast<int>(y), static_cast<unsigned>(mo))) ||
        h > 23 || mi > 59 || se > 59) {
        return bad("out-of-range field");
    }
    std::size_t pos = 19;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        const std::size_t start = pos;
        while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
        if (pos == start) return bad("empty fractional seconds");
    }
    if (pos >= s.size()) return bad("missing UTC offset");
    std::int64_t offset = 0;
    if (s[pos] == 'Z' || s[pos] == 'z') {
        ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
        const bool neg = s[pos] == '-';
        long oh, om;
        if (pos + 6 > s.size() || s[pos + 3] != ':' ||
            !detail::parse_fixed_uint(s, pos + 1, 2, oh) ||
            !detail::parse_fixed_uint(s, pos + 4, 2, om) || oh > 23 || om > 59) {
            return bad("malformed numeric offset");
        }
        offset = (neg ? -1 : 1) * (oh * 3600 + om * 60);
        pos += 6;
    } else {
        return bad("missing UTC offset");
    }
    if (pos != s.size()) return bad("trailing characters");

    const std::int64_t days = days_from_civil(static_cast<int>(y), static_cast<unsigned>(mo),
                                              static_cast<unsigned>(d));
    return days * 86400 + h * 3600 + mi * 60 + se - offset;
}

} // namespace driftwatch
