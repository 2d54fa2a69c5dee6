#pragma once

#include <cmath>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "probpnn/calendar.hpp"
#include "probpnn/error.hpp"
#include "probpnn/timeseries.hpp"

namespace probpnn {

/// A statistic aligned to the source series; nullopt marks positions where
/// no qualifying history exists.
struct StatSeries {
    std::vector<std::optional<double>> values;
    CalendarGrouping grouping;
    std::size_t window_steps = 0;

    std::size_t size() const { return values.size(); }
    bool defined(std::size_t i) const { return values[i].has_value(); }
    double operator[](std::size_t i) const { return *values[i]; }
};

/// Calendar-grouped rolling profile, variance and standard deviation.
struct RollingStats {
    StatSeries profile;
    StatSeries variance;
    StatSeries std;
    Duration window{};
    CalendarGrouping grouping;
    /// First index where profile, variance and std are all defined (size() if never).
    std::size_t defined_from = 0;

    std::size_t size() const { return profile.size(); }
    bool defined(std::size_t i) const { return profile.defined(i) && variance.defined(i) && std.defined(i); }
};

inline std::size_t window_steps(const TimeSeries& ts, Duration window) {
    if (window.count() <= 0 || window.count() % ts.step.count() != 0)
        throw ConfigError("rolling window must be a positive multiple of the series step");
    return static_cast<std::size_t>(window.count() / ts.step.count());
}

namespace detail {

// Walks every index t together with the in-window, same-group indices
// i in [t - W, t - 1], in ascending order of i.
template <typename Visit>
void for_each_group_window(const TimeSeries& ts, const CalendarGrouping& grouping, std::size_t w, Visit&& visit) {
    std::vector<std::deque<std::size_t>> members(static_cast<std::size_t>(grouping.group_count()));
    std::vector<int> group(ts.size());
    for (std::size_t t = 0; t < ts.size(); ++t) group[t] = grouping.group_id(ts.timestamp(t));
    for (std::size_t t = 0; t < ts.size(); ++t) {
        auto& q = members[static_cast<std::size_t>(group[t])];
        while (!q.empty() && q.front() + w < t) q.pop_front();
        visit(t, q);
        q.push_back(t);
    }
}

}  // namespace detail

/// p_t = mean of l_i over i in [t - W, t - 1] sharing t's calendar group.
inline StatSeries rolling_average(const TimeSeries& ts, const CalendarGrouping& grouping, Duration window) {
    const auto w = window_steps(ts, window);
    StatSeries out{std::vector<std::optional<double>>(ts.size()), grouping, w};
    detail::for_each_group_window(ts, grouping, w, [&](std::size_t t, const std::deque<std::size_t>& idx) {
        if (idx.empty()) return;
        double sum = 0.0;
        for (auto i : idx) sum += ts.values[i];
        out.values[t] = sum / static_cast<double>(idx.size());
    });
    return out;
}

/// v_t = mean of (l_i - p_i)^2 over the same index set, restricted to i with a
/// defined profile. Deviations use the profile at the historical index i.
inline StatSeries rolling_variance(const TimeSeries& ts, const StatSeries& profile, const CalendarGrouping& grouping,
                                   Duration window) {
    const auto w = window_steps(ts, window);
    if (profile.grouping != grouping || profile.window_steps != w || profile.size() != ts.size())
        throw ConfigError("profile was computed with a different grouping or window");
    StatSeries out{std::vector<std::optional<double>>(ts.size()), grouping, w};
    detail::for_each_group_window(ts, grouping, w, [&](std::size_t t, const std::deque<std::size_t>& idx) {
        double sum = 0.0;
        std::size_t n = 0;
        for (auto i : idx) {
            if (!profile.defined(i)) continue;
            const double d = ts.values[i] - profile[i];
            sum += d * d;
            ++n;
        }
        if (n > 0) out.values[t] = sum / static_cast<double>(n);
    });
    return out;
}

inline StatSeries rolling_std(const StatSeries& variance) {
    StatSeries out{std::vector<std::optional<double>>(variance.size()), variance.grouping, variance.window_steps};
    for (std::size_t i = 0; i < variance.size(); ++i) {
        if (!variance.defined(i)) continue;
        if (variance[i] < 0.0)
            throw InvariantError("negative rolling variance at index " + std::to_string(i));
        out.values[i] = std::sqrt(variance[i]);
    }
    return out;
}

inline RollingStats compute_rolling_stats(const TimeSeries& ts, const CalendarGrouping& grouping, Duration window) {
    RollingStats stats;
    stats.window = window;
    stats.grouping = grouping;
    stats.profile = rolling_average(ts, grouping, window);
    stats.variance = rolling_variance(ts, stats.profile, grouping, window);
    stats.std = rolling_std(stats.variance);
    stats.defined_from = ts.size();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (stats.defined(i)) {
            stats.defined_from = i;
            break;
        }
    }
    return stats;
}

/// CSV export of (timestamp, p, v, sigma); undefined cells are left empty.
inline void write_stats_csv(const std::string& path, const TimeSeries& ts, const RollingStats& stats) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.precision(17);
    out << "timestamp,profile,variance,std\n";
    auto cell = [&](const StatSeries& s, std::size_t i) {
        if (s.defined(i)) out << s[i];
    };
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out << format_timestamp(ts.timestamp(i)) << ',';
        cell(stats.profile, i);
        out << ',';
        cell(stats.variance, i);
        out << ',';
        cell(stats.std, i);
        out << '\n';
    }
}

}  // namespace probpnn
