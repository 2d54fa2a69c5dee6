#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "probpnn/random.hpp"
#include "probpnn/timeseries.hpp"

namespace probpnn {

enum class SyntheticKind {
    /// Daily double-sinusoid times a weekday factor, a linear trend and AR(1)
    /// noise whose innovation std depends on the hour of day.
    Standard,
    /// Fixed hour-of-day profile plus independent Gaussian noise with an
    /// hour-dependent std; the generating distribution is known exactly.
    GaussianProfile,
};

inline SyntheticKind parse_synthetic_kind(std::string_view name) {
    if (name == "standard") return SyntheticKind::Standard;
    if (name == "gaussian_profile") return SyntheticKind::GaussianProfile;
    throw ConfigError("unknown synthetic kind '" + std::string(name) + "'");
}

struct SyntheticOptions {
    std::size_t series = 5;
    std::size_t weeks = 16;
    std::uint64_t seed = 1;
    SyntheticKind kind = SyntheticKind::Standard;
    /// A Monday midnight, so weeks align with the calendar.
    Timestamp start = parse_timestamp("2021-01-04 00:00:00");
};

namespace detail {

inline double daily_shape(int hour) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return 1.0 + 0.35 * std::sin(two_pi * (hour - 8) / 24.0) + 0.12 * std::sin(2.0 * two_pi * hour / 24.0);
}

inline double weekday_factor(int dow) {
    static constexpr double f[] = {1.0, 1.03, 1.02, 1.0, 0.96, 0.72, 0.62};
    return f[dow];
}

/// Relative noise std as a function of the hour: quiet at night, noisy at the peak.
inline double noise_shape(int hour) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return 0.5 + 0.4 * (1.0 + std::sin(two_pi * (hour - 8) / 24.0));
}

}  // namespace detail

/// Mean and std of the GaussianProfile generator at a timestamp, for a series with base level `base`.
inline std::pair<double, double> gaussian_profile_moments(double base, Timestamp ts) {
    const int hour = hour_of_day(ts);
    return {base * detail::daily_shape(hour), 0.05 * base * detail::noise_shape(hour)};
}

inline double synthetic_base_level(std::uint64_t seed, std::size_t index) {
    Rng rng(mix_seed(seed, index));
    return rng.uniform(50.0, 150.0);
}

inline std::vector<TimeSeries> generate_synthetic(const SyntheticOptions& o) {
    std::vector<TimeSeries> out;
    const std::size_t n = o.weeks * 168;
    for (std::size_t s = 0; s < o.series; ++s) {
        Rng rng(mix_seed(o.seed, s));
        const double base = rng.uniform(50.0, 150.0);
        const double growth = rng.uniform(0.01, 0.03);  // per week, relative
        const double noise_level = rng.uniform(0.03, 0.05);
        const double phi = 0.75;
        TimeSeries ts;
        ts.name = "series_" + std::to_string(s);
        ts.start = o.start;
        ts.step = std::chrono::hours{1};
        ts.values.reserve(n);
        double ar = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto t = ts.timestamp(i);
            const int hour = hour_of_day(t);
            if (o.kind == SyntheticKind::GaussianProfile) {
                const auto [mu, sigma] = gaussian_profile_moments(base, t);
                ts.values.push_back(rng.normal(mu, sigma));
                continue;
            }
            const double trend = 1.0 + growth * static_cast<double>(i) / 168.0;
            const double level = base * detail::daily_shape(hour) * detail::weekday_factor(day_of_week(t)) * trend;
            ar = phi * ar + rng.normal(0.0, noise_level * base * detail::noise_shape(hour));
            ts.values.push_back(level + ar);
        }
        out.push_back(std::move(ts));
    }
    return out;
}

}  // namespace probpnn
