#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "probpnn/dist.hpp"
#include "probpnn/metrics.hpp"
#include "probpnn/random.hpp"

namespace probpnn {

struct SeriesScores {
    double ncrps = 0.0;
    double npl = 0.0;
    double dicr = 0.0;
    double nmae = 0.0;
    double training_seconds = 0.0;
};

/// Forecasts of one method over a test period, flattened to T evaluation points.
struct EvaluationInput {
    std::vector<GaussianForecast> forecasts;
    std::vector<std::vector<double>> targets;  // one per forecast
};

inline QuantileForecasts quantile_curves(const std::vector<GaussianForecast>& forecasts,
                                         const std::vector<double>& levels) {
    QuantileForecasts q;
    for (double alpha : levels) {
        if (q.count(alpha)) continue;
        auto& curve = q[alpha];
        for (const auto& f : forecasts) {
            auto part = quantile(f, alpha);
            curve.insert(curve.end(), part.begin(), part.end());
        }
    }
    return q;
}

/// nCRPS from an `ensemble_size`-member sample per point, plus nPL, DICR and
/// nMAE of the median. Sampling seeds derive from `seed` and the forecast index.
inline SeriesScores score_forecasts(const EvaluationInput& in, double y_max, std::size_t ensemble_size,
                                    std::uint64_t seed, const QuantileSets& sets = QuantileSets::standard()) {
    if (in.forecasts.empty() || in.forecasts.size() != in.targets.size())
        throw ConfigError("score_forecasts needs one target per forecast");
    std::vector<double> y, median;
    for (std::size_t f = 0; f < in.forecasts.size(); ++f) {
        if (in.targets[f].size() != in.forecasts[f].size()) throw ConfigError("forecast/target length mismatch");
        y.insert(y.end(), in.targets[f].begin(), in.targets[f].end());
        median.insert(median.end(), in.forecasts[f].mu.begin(), in.forecasts[f].mu.end());
    }
    const std::size_t t_count = y.size();
    std::vector<double> ensemble(ensemble_size * t_count);
    std::size_t offset = 0;
    for (std::size_t f = 0; f < in.forecasts.size(); ++f) {
        const auto& g = in.forecasts[f];
        const auto draws = sample_ensemble(g, ensemble_size, mix_seed(seed, f));
        for (std::size_t r = 0; r < ensemble_size; ++r)
            for (std::size_t t = 0; t < g.size(); ++t) ensemble[r * t_count + offset + t] = draws[r * g.size() + t];
        offset += g.size();
    }
    std::vector<double> levels = sets.pinball;
    for (const auto& [lo, hi] : sets.coverage) {
        levels.push_back(lo);
        levels.push_back(hi);
    }
    const auto curves = quantile_curves(in.forecasts, levels);
    SeriesScores s;
    s.ncrps = ncrps(ensemble, ensemble_size, y, y_max);
    s.npl = npl(curves, y, y_max, sets.pinball);
    s.dicr = dicr(curves, y, sets.coverage);
    s.nmae = nmae(median, y, y_max);
    return s;
}

/// Constant Gaussian fitted to a reference sample (mean and population std).
inline GaussianForecast climatology_forecast(std::span<const double> reference, std::size_t horizon,
                                             Timestamp origin = {}) {
    if (reference.empty()) throw ConfigError("climatology needs reference data");
    double mean = 0.0;
    for (double x : reference) mean += x;
    mean /= static_cast<double>(reference.size());
    double var = 0.0;
    for (double x : reference) var += (x - mean) * (x - mean);
    var /= static_cast<double>(reference.size());
    return {origin, std::vector<double>(horizon, mean),
            std::vector<double>(horizon, std::max(std::sqrt(var), kDefaultSigmaFloor))};
}

}  // namespace probpnn
