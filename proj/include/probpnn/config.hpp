#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "probpnn/calendar.hpp"
#include "probpnn/diff/param_store.hpp"
#include "probpnn/error.hpp"

namespace probpnn {

/// Whether the expected-error output is a standard deviation or a variance.
enum class Variant { Sigma, SigmaSquared };

inline std::string to_string(Variant v) { return v == Variant::Sigma ? "sigma" : "sigma_squared"; }

inline Variant parse_variant(std::string_view name) {
    if (name == "sigma") return Variant::Sigma;
    if (name == "sigma_squared" || name == "sigma2") return Variant::SigmaSquared;
    throw ConfigError("unknown variant '" + std::string(name) + "'");
}

struct ProbPNNConfig {
    Variant variant = Variant::Sigma;
    std::size_t history = 36;     // k, hours
    std::size_t horizon = 24;
    std::size_t period = 168;     // s
    std::size_t trend_depth = 3;  // m
    std::size_t window_days = 28; // W
    CalendarGrouping grouping{GroupingKind::HourOfDayWeekend};
    /// Filters per convolution layer of every ConvNet; Elu on all but the last.
    std::vector<std::size_t> channel_plan{4, 8, 16, 32, 1};
    std::size_t exo_channels = 5;
    diff::AdamOptions adam;
    std::size_t epochs = 50;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    /// Adaptive loss weights act as constants in the backward pass.
    bool detach_adaptive_weights = true;
    /// Lower bound applied to the expected error at prediction time.
    double err_floor = 1e-6;

    void validate() const {
        if (history == 0 || horizon == 0 || period == 0 || trend_depth == 0 || window_days == 0 || epochs == 0 ||
            batch_size == 0 || exo_channels == 0)
            throw ConfigError("model sizes, epochs and batch size must be positive");
        if (channel_plan.empty()) throw ConfigError("channel plan must have at least one layer");
        for (auto c : channel_plan)
            if (c == 0) throw ConfigError("channel plan entries must be positive");
        if (channel_plan.back() != 1) throw ConfigError("the last convolution layer must have one filter");
        if (!(adam.learning_rate > 0.0) || !(err_floor > 0.0)) throw ConfigError("learning rate and error floor must be positive");
    }
};

inline nlohmann::json to_json(const ProbPNNConfig& c) {
    return {
        {"variant", to_string(c.variant)},
        {"history", c.history},
        {"horizon", c.horizon},
        {"period", c.period},
        {"trend_depth", c.trend_depth},
        {"window_days", c.window_days},
        {"grouping", to_string(c.grouping.kind)},
        {"channel_plan", c.channel_plan},
        {"exo_channels", c.exo_channels},
        {"learning_rate", c.adam.learning_rate},
        {"beta1", c.adam.beta1},
        {"beta2", c.adam.beta2},
        {"epsilon", c.adam.epsilon},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"seed", c.seed},
        {"detach_adaptive_weights", c.detach_adaptive_weights},
        {"err_floor", c.err_floor},
    };
}

/// Missing keys keep their defaults.
inline ProbPNNConfig config_from_json(const nlohmann::json& j, ProbPNNConfig c = {}) {
    try {
        if (j.contains("variant")) c.variant = parse_variant(j.at("variant").get<std::string>());
        c.history = j.value("history", c.history);
        c.horizon = j.value("horizon", c.horizon);
        c.period = j.value("period", c.period);
        c.trend_depth = j.value("trend_depth", c.trend_depth);
        c.window_days = j.value("window_days", c.window_days);
        if (j.contains("grouping")) c.grouping.kind = parse_grouping(j.at("grouping").get<std::string>());
        c.channel_plan = j.value("channel_plan", c.channel_plan);
        c.exo_channels = j.value("exo_channels", c.exo_channels);
        c.adam.learning_rate = j.value("learning_rate", c.adam.learning_rate);
        c.adam.beta1 = j.value("beta1", c.adam.beta1);
        c.adam.beta2 = j.value("beta2", c.adam.beta2);
        c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
        c.epochs = j.value("epochs", c.epochs);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.seed = j.value("seed", c.seed);
        c.detach_adaptive_weights = j.value("detach_adaptive_weights", c.detach_adaptive_weights);
        c.err_floor = j.value("err_floor", c.err_floor);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid model config: ") + e.what());
    }
    c.validate();
    return c;
}

}  // namespace probpnn
