#pragma once

#include <cmath>
#include <span>
#include <utility>

#include "probpnn/config.hpp"
#include "probpnn/diff/ops.hpp"

namespace probpnn {

/// Mean absolute error of the expected value.
inline double loss_l1(std::span<const double> mu, std::span<const double> target) {
    if (mu.size() != target.size() || mu.empty()) throw ConfigError("loss_l1: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += std::fabs(mu[i] - target[i]);
    return s / static_cast<double>(mu.size());
}

/// Expected-error loss: mean |(mu - y)^2 - err| for a variance output,
/// mean ||mu - y| - err| for a standard-deviation output.
inline double loss_l2(std::span<const double> mu, std::span<const double> err, std::span<const double> target,
                      Variant variant) {
    if (mu.size() != target.size() || err.size() != target.size() || mu.empty())
        throw ConfigError("loss_l2: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
        const double d = mu[i] - target[i];
        const double realised = variant == Variant::SigmaSquared ? d * d : std::fabs(d);
        s += std::fabs(realised - err[i]);
    }
    return s / static_cast<double>(mu.size());
}

struct LossWeights {
    double w1 = 0.5;
    double w2 = 0.5;
};

/// w1 = L2 / (L1 + L2), w2 = L1 / (L1 + L2); equal weights when both vanish.
inline LossWeights adaptive_weights(double l1, double l2) {
    if (l1 < 0.0 || l2 < 0.0) throw InvariantError("losses must be non-negative");
    const double total = l1 + l2;
    if (total == 0.0) return {0.5, 0.5};
    return {l2 / total, l1 / total};
}

inline double loss_total(double l1, double l2) {
    const auto w = adaptive_weights(l1, l2);
    return w.w1 * l1 + w.w2 * l2;
}

/// Closed form of the adaptive loss, 2 L1 L2 / (L1 + L2).
inline double loss_total_harmonic(double l1, double l2) {
    return l1 + l2 == 0.0 ? 0.0 : 2.0 * l1 * l2 / (l1 + l2);
}

// Differentiable versions.

inline diff::Tensor loss_l1(const diff::Tensor& mu, const diff::Tensor& target) {
    return diff::mean(diff::abs(diff::sub(mu, target)));
}

inline diff::Tensor loss_l2(const diff::Tensor& mu, const diff::Tensor& err, const diff::Tensor& target,
                            Variant variant) {
    auto d = diff::sub(mu, target);
    auto realised = variant == Variant::SigmaSquared ? diff::square(d) : diff::abs(d);
    return diff::mean(diff::abs(diff::sub(realised, err)));
}

}  // namespace probpnn
