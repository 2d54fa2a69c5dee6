#pragma once

#include <optional>
#include <vector>

#include "probpnn/calendar.hpp"
#include "probpnn/timeseries.hpp"

namespace probpnn::test {

// O(n * W) direct evaluation of the grouped rolling mean: scan [t - W, t - 1]
// and average the entries whose calendar group equals t's.
inline std::vector<std::optional<double>> brute_profile(const TimeSeries& ts, const CalendarGrouping& g, long w) {
    std::vector<std::optional<double>> out(ts.size());
    for (long t = 0; t < static_cast<long>(ts.size()); ++t) {
        double sum = 0.0;
        long n = 0;
        for (long i = std::max(0L, t - w); i <= t - 1; ++i) {
            if (!g.same_group(ts.timestamp(static_cast<std::size_t>(t)), ts.timestamp(static_cast<std::size_t>(i))))
                continue;
            sum += ts.values[static_cast<std::size_t>(i)];
            ++n;
        }
        if (n > 0) out[static_cast<std::size_t>(t)] = sum / static_cast<double>(n);
    }
    return out;
}

// Same scan for the rolling variance, deviating each l_i from the profile at i.
inline std::vector<std::optional<double>> brute_variance(const TimeSeries& ts, const CalendarGrouping& g, long w) {
    const auto p = brute_profile(ts, g, w);
    std::vector<std::optional<double>> out(ts.size());
    for (long t = 0; t < static_cast<long>(ts.size()); ++t) {
        double sum = 0.0;
        long n = 0;
        for (long i = std::max(0L, t - w); i <= t - 1; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (!g.same_group(ts.timestamp(static_cast<std::size_t>(t)), ts.timestamp(ui)) || !p[ui]) continue;
            const double d = ts.values[ui] - *p[ui];
            sum += d * d;
            ++n;
        }
        if (n > 0) out[static_cast<std::size_t>(t)] = sum / static_cast<double>(n);
    }
    return out;
}

}  // namespace probpnn::test
