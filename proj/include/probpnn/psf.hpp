#pragma once

#include <string>
#include <vector>

#include "probpnn/rollstats.hpp"

namespace probpnn {

/// Rolling profile and rolling std read directly as Gaussian mean and std.
struct PSFForecast {
    Timestamp origin{};
    std::vector<double> mu;
    std::vector<double> sigma;
};

/// Forecast for steps origin+1 ... origin+horizon; no fitting involved.
inline PSFForecast psf_forecast(const RollingStats& stats, std::size_t origin, std::size_t horizon) {
    PSFForecast f;
    for (std::size_t h = 1; h <= horizon; ++h) {
        const std::size_t i = origin + h;
        if (i >= stats.size() || !stats.profile.defined(i) || !stats.std.defined(i))
            throw DataError("statistics undefined at forecast step " + std::to_string(h) + " (index " +
                            std::to_string(i) + ")");
        f.mu.push_back(stats.profile[i]);
        f.sigma.push_back(stats.std[i]);
    }
    return f;
}

inline PSFForecast psf_forecast(const TimeSeries& ts, const RollingStats& stats, Timestamp origin,
                                std::size_t horizon) {
    auto idx = ts.index_of(origin);
    if (!idx) throw DataError("origin " + format_timestamp(origin) + " is not on the series grid");
    auto f = psf_forecast(stats, *idx, horizon);
    f.origin = origin;
    return f;
}

}  // namespace probpnn
