#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "probpnn/error.hpp"

namespace probpnn {

/// Quantile levels used by the pinball loss and the coverage bands.
struct QuantileSets {
    std::vector<double> pinball;                      // descending
    std::vector<std::pair<double, double>> coverage;  // (lower, upper), lower < upper

    static QuantileSets standard() {
        QuantileSets q;
        q.pinball = {0.99, 0.98, 0.97, 0.96, 0.95, 0.90, 0.85, 0.80, 0.75, 0.70, 0.65, 0.60, 0.55, 0.50,
                     0.45, 0.40, 0.35, 0.30, 0.25, 0.20, 0.15, 0.10, 0.05, 0.04, 0.03, 0.02, 0.01};
        q.coverage = {{0.05, 0.95}, {0.10, 0.90}, {0.15, 0.85}, {0.20, 0.80}, {0.25, 0.75},
                      {0.30, 0.70}, {0.35, 0.65}, {0.40, 0.60}, {0.45, 0.55}};
        return q;
    }
};

/// Quantile level -> forecast curve over T evaluation points.
using QuantileForecasts = std::map<double, std::vector<double>>;

inline const std::vector<double>& find_quantile(const QuantileForecasts& q, double alpha) {
    for (const auto& [level, curve] : q)
        if (std::fabs(level - alpha) < 1e-12) return curve;
    throw ConfigError("missing quantile forecast for level " + std::to_string(alpha));
}

inline void require_normaliser(double y_max) {
    if (!(y_max > 0.0)) throw ConfigError("y_max must be positive");
}

/// Ensemble CRPS at one point: mean|X_i - y| - 1/(2 n^2) sum_ij |X_i - X_j|.
/// `members` is sorted in place.
inline double crps_ensemble(std::span<double> members, double y) {
    const std::size_t n = members.size();
    if (n == 0) throw ConfigError("empty ensemble");
    std::sort(members.begin(), members.end());
    double abs_err = 0.0, spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        abs_err += std::fabs(members[i] - y);
        // sorted order turns sum_ij |x_i - x_j| into 2 sum_i (2i - n + 1) x_(i)
        spread += (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0) * members[i];
    }
    const double nd = static_cast<double>(n);
    return abs_err / nd - spread / (nd * nd);
}

/// Normalised CRPS of an n x T row-major ensemble, averaged over the T points.
inline double ncrps(std::span<const double> ensemble, std::size_t n, std::span<const double> y, double y_max) {
    require_normaliser(y_max);
    if (n < 2) throw ConfigError("ensemble CRPS needs at least two members");
    const std::size_t t_count = y.size();
    if (ensemble.size() != n * t_count) throw ConfigError("ensemble shape does not match observations");
    if (t_count == 0) throw ConfigError("no observations");
    std::vector<double> column(n);
    double total = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) {
        for (std::size_t r = 0; r < n; ++r) column[r] = ensemble[r * t_count + t];
        total += crps_ensemble(column, y[t]);
    }
    return total / static_cast<double>(t_count) / y_max;
}

inline double pinball(double y, double q, double alpha) { return y >= q ? (y - q) * alpha : (q - y) * (1.0 - alpha); }

/// Normalised pinball loss averaged over the given levels and all points.
inline double npl(const QuantileForecasts& forecasts, std::span<const double> y, double y_max,
                  const std::vector<double>& levels) {
    require_normaliser(y_max);
    if (levels.empty() || y.empty()) throw ConfigError("npl needs levels and observations");
    double total = 0.0;
    for (double alpha : levels) {
        const auto& q = find_quantile(forecasts, alpha);
        if (q.size() != y.size()) throw ConfigError("quantile curve length mismatch");
        for (std::size_t i = 0; i < y.size(); ++i) total += pinball(y[i], q[i], alpha);
    }
    return total / (y_max * static_cast<double>(y.size()) * static_cast<double>(levels.size()));
}

inline double npl(const QuantileForecasts& forecasts, std::span<const double> y, double y_max) {
    return npl(forecasts, y, y_max, QuantileSets::standard().pinball);
}

/// Share of points strictly inside (lower, upper).
inline double coverage_rate(std::span<const double> lower, std::span<const double> upper, std::span<const double> y) {
    if (lower.size() != y.size() || upper.size() != y.size() || y.empty())
        throw ConfigError("coverage_rate: length mismatch");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (lower[i] < y[i] && y[i] < upper[i]) ++inside;
    return static_cast<double>(inside) / static_cast<double>(y.size());
}

/// Sum over bands of |CR - nominal width|.
inline double dicr(const QuantileForecasts& forecasts, std::span<const double> y,
                   const std::vector<std::pair<double, double>>& bands) {
    double total = 0.0;
    for (const auto& [lo, hi] : bands) {
        const double cr = coverage_rate(find_quantile(forecasts, lo), find_quantile(forecasts, hi), y);
        total += std::fabs(cr - (hi - lo));
    }
    return total;
}

inline double dicr(const QuantileForecasts& forecasts, std::span<const double> y) {
    return dicr(forecasts, y, QuantileSets::standard().coverage);
}

/// Normalised mean absolute error of a point (median) forecast.
inline double nmae(std::span<const double> mu, std::span<const double> y, double y_max) {
    require_normaliser(y_max);
    if (mu.size() != y.size() || y.empty()) throw ConfigError("nmae: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::fabs(mu[i] - y[i]);
    return s / (y_max * static_cast<double>(y.size()));
}

/// Ranks of one row of scores, ascending (lower is better), ties averaged.
inline std::vector<double> rank_row(std::span<const double> scores) {
    const std::size_t n = scores.size();
    for (double s : scores)
        if (std::isnan(s)) throw ConfigError("cannot rank a NaN score");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double avg = (static_cast<double>(i + j) / 2.0) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

/// Average rank per method over series; `scores[s][m]` is series s, method m.
inline std::vector<double> rank_methods(const std::vector<std::vector<double>>& scores) {
    if (scores.empty()) throw ConfigError("no scores to rank");
    const std::size_t methods = scores.front().size();
    std::vector<double> avg(methods, 0.0);
    for (const auto& row : scores) {
        if (row.size() != methods) throw ConfigError("missing score in ranking table");
        const auto r = rank_row(row);
        for (std::size_t m = 0; m < methods; ++m) avg[m] += r[m];
    }
    for (auto& a : avg) a /= static_cast<double>(scores.size());
    return avg;
}

}  // namespace probpnn
