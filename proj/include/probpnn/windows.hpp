#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "probpnn/rollstats.hpp"
#include "probpnn/timeseries.hpp"

namespace probpnn {

struct WindowOptions {
    std::size_t history = 36;   // k
    std::size_t horizon = 24;
    std::size_t period = 168;   // s
    std::size_t trend_depth = 3;  // m
    std::size_t stride = 1;
    /// Origins whose history starts before this index are skipped; used to
    /// exclude the statistics warm-up span.
    std::size_t warmup = 0;
    /// Candidate origins are first_origin, first_origin + stride, ...
    std::size_t first_origin = 0;
    std::optional<std::size_t> last_origin;
};

/// Everything a forecast from origin t (the last observed index) needs.
/// Horizon steps are t+1 ... t+horizon.
struct SampleWindow {
    std::size_t origin = 0;
    Timestamp origin_time{};
    std::vector<double> history;         // [k] l over t-k+1 .. t
    std::vector<double> noise_history;   // [k] l - p over the same span
    std::vector<double> trend_input;     // [horizon x m]; row h holds l_{th-s*m} .. l_{th-s}
    std::vector<double> exo;             // [(k + horizon) x channels], t-k+1 .. t+horizon
    std::size_t exo_channels = 0;
    std::vector<double> stats_profile;   // [horizon]
    std::vector<double> stats_variance;  // [horizon]
    std::vector<double> stats_std;       // [horizon]
    std::vector<double> target;          // [horizon]
};

struct WindowSet {
    std::vector<SampleWindow> windows;
    std::size_t skipped = 0;
    std::string diagnostic;
};

/// Smallest series length that yields one window when statistics are defined
/// everywhere they are needed.
inline std::size_t minimum_context(const WindowOptions& o) {
    return std::max(o.history, o.period * o.trend_depth) + o.horizon;
}

namespace detail {

inline bool origin_valid(const TimeSeries& ts, const RollingStats& stats, const WindowOptions& o, std::size_t t) {
    const std::size_t n = ts.size();
    if (t + 1 < o.history || t + o.horizon >= n) return false;
    if (t + 1 < o.period * o.trend_depth) return false;
    if (t + 1 - o.history < o.warmup) return false;
    for (std::size_t i = t + 1 - o.history; i <= t; ++i)
        if (!stats.profile.defined(i)) return false;
    for (std::size_t i = t + 1; i <= t + o.horizon; ++i)
        if (!stats.defined(i)) return false;
    return true;
}

}  // namespace detail

inline SampleWindow build_window(const TimeSeries& ts, const RollingStats& stats, const ExogenousFeatures& exo,
                                 const WindowOptions& o, std::size_t t) {
    SampleWindow w;
    w.origin = t;
    w.origin_time = ts.timestamp(t);
    const std::size_t hist_begin = t + 1 - o.history;
    for (std::size_t i = hist_begin; i <= t; ++i) {
        w.history.push_back(ts.values[i]);
        w.noise_history.push_back(ts.values[i] - stats.profile[i]);
    }
    w.trend_input.reserve(o.horizon * o.trend_depth);
    for (std::size_t h = 1; h <= o.horizon; ++h) {
        const std::size_t step = t + h;
        for (std::size_t j = o.trend_depth; j >= 1; --j) w.trend_input.push_back(ts.values[step - o.period * j]);
    }
    w.exo_channels = exo.channel_count();
    for (std::size_t i = hist_begin; i <= t + o.horizon; ++i)
        for (std::size_t c = 0; c < w.exo_channels; ++c) w.exo.push_back(exo.at(i, c));
    for (std::size_t i = t + 1; i <= t + o.horizon; ++i) {
        w.stats_profile.push_back(stats.profile[i]);
        w.stats_variance.push_back(stats.variance[i]);
        w.stats_std.push_back(stats.std[i]);
        w.target.push_back(ts.values[i]);
    }
    return w;
}

/// Emits a window at every valid candidate origin. An origin is valid when
/// the k-step history, all m periodicity lags and every needed statistic
/// exist; invalid candidates are counted in `skipped`.
inline WindowSet make_windows(const TimeSeries& ts, const RollingStats& stats, const ExogenousFeatures& exo,
                              const WindowOptions& o) {
    if (o.history == 0 || o.horizon == 0 || o.period == 0 || o.trend_depth == 0 || o.stride == 0)
        throw ConfigError("window lengths and stride must be positive");
    if (stats.size() != ts.size() || exo.size() != ts.size())
        throw ConfigError("statistics and exogenous features must align with the series");
    WindowSet out;
    if (ts.size() < minimum_context(o) || ts.size() <= o.horizon) {
        out.diagnostic = "series '" + ts.name + "' has " + std::to_string(ts.size()) +
                         " points; at least " + std::to_string(minimum_context(o)) + " are required";
        return out;
    }
    std::size_t last = ts.size() - 1 - o.horizon;
    if (o.last_origin) last = std::min(last, *o.last_origin);
    for (std::size_t t = o.first_origin; t <= last; t += o.stride) {
        if (detail::origin_valid(ts, stats, o, t))
            out.windows.push_back(build_window(ts, stats, exo, o, t));
        else
            ++out.skipped;
    }
    if (out.windows.empty())
        out.diagnostic = "series '" + ts.name + "' has no valid forecast origin";
    return out;
}

/// Debug dump: one row per window, origin timestamp followed by the
/// flattened slices.
inline void write_windows_csv(const std::string& path, const std::vector<SampleWindow>& windows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.precision(17);
    out << "origin,slice,values\n";
    auto row = [&](const SampleWindow& w, const char* name, const std::vector<double>& v) {
        out << format_timestamp(w.origin_time) << ',' << name << ",\"";
        for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
        out << "\"\n";
    };
    for (const auto& w : windows) {
        row(w, "history", w.history);
        row(w, "noise_history", w.noise_history);
        row(w, "trend_input", w.trend_input);
        row(w, "exo", w.exo);
        row(w, "stats_profile", w.stats_profile);
        row(w, "stats_variance", w.stats_variance);
        row(w, "stats_std", w.stats_std);
        row(w, "target", w.target);
    }
}

}  // namespace probpnn
