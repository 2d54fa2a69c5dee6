#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "probpnn/error.hpp"
#include "probpnn/model.hpp"
#include "probpnn/psf.hpp"
#include "probpnn/random.hpp"

namespace probpnn {

inline double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Inverse standard normal CDF: Acklam's rational approximation followed by
/// one Halley step against erfc, giving close to double precision.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw ConfigError("quantile level must lie in (0, 1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;
    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

struct GaussianForecast {
    Timestamp origin{};
    std::vector<double> mu;
    std::vector<double> sigma;

    std::size_t size() const { return mu.size(); }
};

inline constexpr double kDefaultSigmaFloor = 1e-6;

/// Standard deviations from a model forecast; a variance output is square-rooted.
inline GaussianForecast to_gaussian(const ProbabilisticForecast& f) {
    GaussianForecast g{f.origin, f.mu, {}};
    g.sigma.reserve(f.err.size());
    for (std::size_t i = 0; i < f.err.size(); ++i) {
        if (!(f.err[i] > 0.0)) throw InvariantError("expected error must be positive at step " + std::to_string(i));
        g.sigma.push_back(f.variant == Variant::Sigma ? f.err[i] : std::sqrt(f.err[i]));
    }
    return g;
}

/// PSF standard deviations pass through, floored so the Gaussian stays proper.
inline GaussianForecast to_gaussian(const PSFForecast& f, double floor = kDefaultSigmaFloor) {
    GaussianForecast g{f.origin, f.mu, f.sigma};
    for (auto& s : g.sigma) {
        if (s < 0.0) throw InvariantError("negative PSF standard deviation");
        s = std::max(s, floor);
    }
    return g;
}

/// mu + sigma * Phi^-1(alpha) per step.
inline std::vector<double> quantile(const GaussianForecast& g, double alpha) {
    const double z = normal_quantile(alpha);
    std::vector<double> q(g.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = g.mu[i] + g.sigma[i] * z;
    return q;
}

/// Closed-form CRPS of N(mu, sigma^2) at observation y.
inline double crps_gaussian(double mu, double sigma, double y) {
    if (!(sigma > 0.0)) throw ConfigError("crps_gaussian needs sigma > 0");
    const double z = (y - mu) / sigma;
    return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - 1.0 / std::sqrt(std::numbers::pi));
}

/// n x horizon draws, row-major; row r is one ensemble member.
inline std::vector<double> sample_ensemble(const GaussianForecast& g, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ConfigError("ensemble size must be at least one");
    Rng rng(seed);
    std::vector<double> out(n * g.size());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t t = 0; t < g.size(); ++t) out[r * g.size() + t] = rng.normal(g.mu[t], g.sigma[t]);
    return out;
}

}  // namespace probpnn
