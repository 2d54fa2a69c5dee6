#pragma once

#include <vector>

#include "probpnn/random.hpp"
#include "probpnn/timeseries.hpp"

namespace probpnn::test {

/// Hourly series with a daily cycle plus uniform noise, starting on a Thursday.
inline TimeSeries random_series(std::size_t length, std::uint64_t seed, double amplitude = 3.0) {
    Rng rng(seed);
    TimeSeries ts;
    ts.name = "random";
    ts.start = parse_timestamp("2020-02-27 00:00");
    ts.step = std::chrono::hours{1};
    for (std::size_t i = 0; i < length; ++i)
        ts.values.push_back(10.0 + amplitude * std::sin(0.2618 * static_cast<double>(i % 24)) + rng.uniform(-2.0, 2.0));
    return ts;
}

}  // namespace probpnn::test
