#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "probpnn/error.hpp"

namespace probpnn {

// Timestamps are naive wall-clock instants: no timezone, no DST. sys_seconds
// is used purely for its civil-calendar arithmetic.
using Timestamp = std::chrono::sys_seconds;
using Duration = std::chrono::seconds;

namespace detail {

inline bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses "YYYY-MM-DD", "YYYY-MM-DD HH:MM[:SS]" or the same with a 'T'
/// separator. A trailing 'Z' is accepted and ignored. Throws DataError.
inline Timestamp parse_timestamp(std::string_view text) {
    auto fail = [&]() -> Timestamp {
        throw DataError("invalid timestamp '" + std::string(text) + "'");
    };
    while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '"' || text.back() == '\r'))
        text.remove_suffix(1);
    if (!text.empty() && text.back() == 'Z') text.remove_suffix(1);

    if (text.size() < 10 || text[4] != '-' || text[7] != '-') return fail();
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    if (!detail::parse_int(text.substr(0, 4), year) || !detail::parse_int(text.substr(5, 2), month) ||
        !detail::parse_int(text.substr(8, 2), day))
        return fail();
    if (text.size() > 10) {
        if (text[10] != ' ' && text[10] != 'T') return fail();
        auto clock = text.substr(11);
        if (clock.size() < 5 || clock[2] != ':') return fail();
        if (!detail::parse_int(clock.substr(0, 2), hour) || !detail::parse_int(clock.substr(3, 2), minute))
            return fail();
        if (clock.size() > 5) {
            if (clock[5] != ':') return fail();
            auto sec = clock.substr(6, 2);
            if (!detail::parse_int(sec, second)) return fail();
            // fractional seconds are not meaningful at hourly resolution
            if (clock.size() > 8 && clock[8] != '.') return fail();
        }
    }
    using namespace std::chrono;
    year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                       std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok() || hour > 23 || minute > 59 || second > 59 || hour < 0 || minute < 0 || second < 0)
        return fail();
    return sys_days{ymd} + hours{hour} + minutes{minute} + seconds{second};
}

inline std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    auto day = floor<days>(ts);
    year_month_day ymd{day};
    hh_mm_ss clock{ts - day};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(clock.hours().count()), static_cast<int>(clock.minutes().count()),
                  static_cast<int>(clock.seconds().count()));
    return buf;
}

inline int hour_of_day(Timestamp ts) {
    using namespace std::chrono;
    return static_cast<int>(floor<hours>(ts - floor<days>(ts)).count());
}

/// 0 = Monday ... 6 = Sunday.
inline int day_of_week(Timestamp ts) {
    using namespace std::chrono;
    return static_cast<int>(weekday{floor<days>(ts)}.iso_encoding()) - 1;
}

/// 1 ... 12.
inline int month_of_year(Timestamp ts) {
    using namespace std::chrono;
    return static_cast<int>(static_cast<unsigned>(year_month_day{floor<days>(ts)}.month()));
}

inline bool is_weekend(Timestamp ts) { return day_of_week(ts) >= 5; }

enum class GroupingKind { HourOfDay, HourOfDayWeekend, HourOfDayDayOfWeek };

/// Calendar-driven grouping: two timestamps belong to the same group iff
/// their group ids are equal.
struct CalendarGrouping {
    GroupingKind kind = GroupingKind::HourOfDayWeekend;

    int group_id(Timestamp ts) const {
        const int hour = hour_of_day(ts);
        switch (kind) {
            case GroupingKind::HourOfDay: return hour;
            case GroupingKind::HourOfDayWeekend: return hour + 24 * (is_weekend(ts) ? 1 : 0);
            case GroupingKind::HourOfDayDayOfWeek: return hour + 24 * day_of_week(ts);
        }
        return hour;
    }

    int group_count() const {
        switch (kind) {
            case GroupingKind::HourOfDay: return 24;
            case GroupingKind::HourOfDayWeekend: return 48;
            case GroupingKind::HourOfDayDayOfWeek: return 168;
        }
        return 24;
    }

    bool same_group(Timestamp a, Timestamp b) const { return group_id(a) == group_id(b); }

    friend bool operator==(const CalendarGrouping&, const CalendarGrouping&) = default;
};

inline std::string to_string(GroupingKind kind) {
    switch (kind) {
        case GroupingKind::HourOfDay: return "hour_of_day";
        case GroupingKind::HourOfDayWeekend: return "hour_of_day_weekend";
        case GroupingKind::HourOfDayDayOfWeek: return "hour_of_day_weekday";
    }
    return "hour_of_day";
}

inline GroupingKind parse_grouping(std::string_view name) {
    if (name == "hour_of_day") return GroupingKind::HourOfDay;
    if (name == "hour_of_day_weekend") return GroupingKind::HourOfDayWeekend;
    if (name == "hour_of_day_weekday") return GroupingKind::HourOfDayDayOfWeek;
    throw ConfigError("unknown calendar grouping '" + std::string(name) + "'");
}

}  // namespace probpnn
