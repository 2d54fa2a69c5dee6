#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "probpnn/loss.hpp"
#include "probpnn/model.hpp"

namespace probpnn {

/// Per-sample loss graphs of one mini-batch.
struct BatchGraph {
    std::vector<diff::Tensor> l1;
    std::vector<diff::Tensor> l2;
    double mean_l1 = 0.0;
    double mean_l2 = 0.0;
};

inline BatchGraph forward_batch(const ProbPNNModel& model, const std::vector<const SampleWindow*>& batch) {
    BatchGraph g;
    for (const auto* w : batch) {
        const auto in = model.scaled_inputs(*w);
        const auto out = model.forward(in);
        g.l1.push_back(loss_l1(out.mu, in.target));
        g.l2.push_back(loss_l2(out.mu, out.err, in.target, model.config().variant));
        g.mean_l1 += g.l1.back().item();
        g.mean_l2 += g.l2.back().item();
    }
    const double n = static_cast<double>(batch.size());
    g.mean_l1 /= n;
    g.mean_l2 /= n;
    return g;
}

/// mean over samples of (c1 * L1_i + c2 * L2_i), with c1, c2 constants.
inline diff::Tensor combine_batch(const BatchGraph& g, double c1, double c2) {
    diff::Tensor total;
    for (std::size_t i = 0; i < g.l1.size(); ++i) {
        auto term = diff::add(diff::scale(g.l1[i], c1), diff::scale(g.l2[i], c2));
        total = i == 0 ? term : diff::add(total, term);
    }
    return diff::scale(total, 1.0 / static_cast<double>(g.l1.size()));
}

/// Coefficients of dL/dL1 and dL/dL2. With detached weights these are (w1, w2);
/// otherwise the derivatives of 2 L1 L2 / (L1 + L2).
inline std::pair<double, double> loss_coefficients(double l1, double l2, bool detached) {
    const auto w = adaptive_weights(l1, l2);
    if (detached) return {w.w1, w.w2};
    const double s = l1 + l2;
    if (s == 0.0) return {0.5, 0.5};
    return {2.0 * l2 * l2 / (s * s), 2.0 * l1 * l1 / (s * s)};
}

struct BatchStats {
    std::size_t epoch = 0;
    std::size_t batch = 0;
    double l1 = 0.0;
    double l2 = 0.0;
    LossWeights weights;
    double loss = 0.0;
};

struct EpochStats {
    std::size_t epoch = 0;
    double loss = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double seconds = 0.0;
};

struct TrainingReport {
    std::vector<EpochStats> epochs;
    double total_seconds = 0.0;
    std::size_t batches_per_epoch = 0;
    std::size_t windows = 0;
};

inline nlohmann::json to_json(const TrainingReport& r) {
    nlohmann::json j;
    j["windows"] = r.windows;
    j["batches_per_epoch"] = r.batches_per_epoch;
    j["training_seconds"] = r.total_seconds;
    j["epochs"] = nlohmann::json::array();
    for (const auto& e : r.epochs)
        j["epochs"].push_back({{"epoch", e.epoch}, {"L", e.loss}, {"L1", e.l1}, {"L2", e.l2}, {"seconds", e.seconds}});
    return j;
}

using BatchObserver = std::function<void(const BatchStats&)>;

/// Mini-batch Adam over seeded shuffles of the windows. Each batch's loss
/// weights come from that batch's own L1 and L2.
inline TrainingReport train(ProbPNNModel& model, const std::vector<SampleWindow>& windows,
                            const BatchObserver& observer = {}) {
    if (windows.empty()) throw ConfigError("no training windows");
    const auto& cfg = model.config();
    for (const auto& w : windows) model.check_window(w);

    TrainingReport report;
    report.windows = windows.size();
    report.batches_per_epoch = (windows.size() + cfg.batch_size - 1) / cfg.batch_size;
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto epoch_start = clock::now();
        Rng rng(mix_seed(cfg.seed, 1000 + epoch));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        EpochStats stats;
        stats.epoch = epoch;
        for (std::size_t b = 0; b < report.batches_per_epoch; ++b) {
            const std::size_t lo = b * cfg.batch_size;
            const std::size_t hi = std::min(lo + cfg.batch_size, order.size());
            std::vector<const SampleWindow*> batch;
            for (std::size_t i = lo; i < hi; ++i) batch.push_back(&windows[order[i]]);

            model.params().zero_grad();
            const auto graph = forward_batch(model, batch);
            const auto weights = adaptive_weights(graph.mean_l1, graph.mean_l2);
            const double loss = weights.w1 * graph.mean_l1 + weights.w2 * graph.mean_l2;
            if (!std::isfinite(loss))
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(b));
            const auto [c1, c2] = loss_coefficients(graph.mean_l1, graph.mean_l2, cfg.detach_adaptive_weights);
            combine_batch(graph, c1, c2).backward();
            try {
                diff::adam_step(model.params(), cfg.adam);
            } catch (const InvariantError& e) {
                throw TrainingError(std::string(e.what()) + " at epoch " + std::to_string(epoch) + ", batch " +
                                    std::to_string(b));
            }

            const double n = static_cast<double>(batch.size());
            stats.loss += loss * n;
            stats.l1 += graph.mean_l1 * n;
            stats.l2 += graph.mean_l2 * n;
            if (observer) observer({epoch, b, graph.mean_l1, graph.mean_l2, weights, loss});
        }
        const double n = static_cast<double>(windows.size());
        stats.loss /= n;
        stats.l1 /= n;
        stats.l2 /= n;
        stats.seconds = std::chrono::duration<double>(clock::now() - epoch_start).count();
        report.epochs.push_back(stats);
    }
    report.total_seconds = std::chrono::duration<double>(clock::now() - start).count();
    return report;
}

}  // namespace probpnn
