/*
* Copyright (C) 2026 dayflow contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef DAYFLOW_TIMEUTIL_HPP
#define DAYFLOW_TIMEUTIL_HPP

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace dayflow {

// All timestamps in the library are seconds since 1970-01-01 00:00:00 in the
// dataset's single local timezone; a calendar day is the number of whole days
// since 1970-01-01 in that same zone. No DST or per-event zone handling.
using LocalSeconds = std::int64_t;
using DayNumber = std::int32_t;

constexpr std::int64_t kSecondsPerDay = 86400;

// Days since 1970-01-01 from a proleptic Gregorian date (valid for the whole
// int range; classic civil-calendar arithmetic).
constexpr std::int64_t days_from_civil(int y, unsigned m, unsigned d)
{
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe    = static_cast<unsigned>(y - era * 400);
    const unsigned doy    = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe    = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
    int year;
    unsigned month;
    unsigned day;
};

constexpr CivilDate civil_from_days(std::int64_t z)
{
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe     = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe     = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y   = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy     = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp      = (5 * doy + 2) / 153;
    const unsigned d       = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m       = mp + (mp < 10 ? 3 : -9);
    return {static_cast<int>(y + (m <= 2)), m, d};
}

constexpr bool is_leap_year(int y)
{
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

constexpr unsigned days_in_month(int y, unsigned m)
{
    constexpr unsigned lengths[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap_year(y)) {
        return 29;
    }
    return lengths[m - 1];
}

constexpr DayNumber day_of(LocalSeconds ts)
{
    // Floor division; timestamps before the epoch round toward earlier days.
    std::int64_t d = ts / kSecondsPerDay;
    if (ts % kSecondsPerDay < 0) {
        --d;
    }
    return static_cast<DayNumber>(d);
}

constexpr double minutes_of_day(LocalSeconds ts)
{
    return static_cast<double>(ts - static_cast<std::int64_t>(day_of(ts)) * kSecondsPerDay) / 60.0;
}

namespace detail {

inline bool parse_digits(std::string_view s, size_t pos, size_t n, unsigned& out)
{
    unsigned v = 0;
    for (size_t i = 0; i < n; ++i) {
        const char c = s[pos + i];
        if (c < '0' || c > '9') {
            return false;
        }
        v = v * 10 + static_cast<unsigned>(c - '0');
    }
    out = v;
    return true;
}

} // namespace detail

// "YYYY-MM-DD" -> day number. Rejects out-of-range calendar components.
inline std::optional<DayNumber> parse_date(std::string_view s)
{
    unsigned y, m, d;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return std::nullopt;
    }
    if (!detail::parse_digits(s, 0, 4, y) || !detail::parse_digits(s, 5, 2, m) ||
        !detail::parse_digits(s, 8, 2, d)) {
        return std::nullopt;
    }
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(static_cast<int>(y), m)) {
        return std::nullopt;
    }
    return static_cast<DayNumber>(days_from_civil(static_cast<int>(y), m, d));
}

// "YYYY-MM-DDTHH:MM:SS" (a space separator is tolerated) -> local seconds.
inline std::optional<LocalSeconds> parse_datetime(std::string_view s)
{
    if (s.size() != 19 || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' || s[16] != ':') {
        return std::nullopt;
    }
    const auto day = parse_date(s.substr(0, 10));
    if (!day) {
        return std::nullopt;
    }
    unsigned hh, mm, ss;
    if (!detail::parse_digits(s, 11, 2, hh) || !detail::parse_digits(s, 14, 2, mm) ||
        !detail::parse_digits(s, 17, 2, ss)) {
        return std::nullopt;
    }
    if (hh > 23 || mm > 59 || ss > 59) {
        return std::nullopt;
    }
    return static_cast<LocalSeconds>(*day) * kSecondsPerDay + hh * 3600 + mm * 60 + ss;
}

inline std::string format_date(DayNumber day)
{
    const CivilDate c = civil_from_days(day);
    char buf[11];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", c.year, c.month, c.day);
    return std::string(buf, 10);
}

inline std::string format_datetime(LocalSeconds ts)
{
    const DayNumber day   = day_of(ts);
    const std::int64_t so = ts - static_cast<std::int64_t>(day) * kSecondsPerDay;
    const CivilDate c     = civil_from_days(day);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d", c.year, c.month, c.day,
                  static_cast<int>(so / 3600), static_cast<int>(so / 60 % 60),
                  static_cast<int>(so % 60));
    return std::string(buf, 19);
}

inline DayNumber make_day(int y, unsigned m, unsigned d)
{
    return static_cast<DayNumber>(days_from_civil(y, m, d));
}

} // namespace dayflow

#endif // DAYFLOW_TIMEUTIL_HPP
