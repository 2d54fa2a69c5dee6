#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "probpnn/config.hpp"
#include "probpnn/diff/ops.hpp"
#include "probpnn/diff/param_store.hpp"
#include "probpnn/random.hpp"
#include "probpnn/windows.hpp"

namespace probpnn {

/// Stack of same-padded kernel-3 convolutions; Elu after every layer but the last.
class ConvNet {
public:
    ConvNet() = default;

    ConvNet(diff::ParamStore& store, const std::string& prefix, std::size_t in_channels,
            const std::vector<std::size_t>& plan, Rng& rng) {
        std::size_t c_in = in_channels;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            const std::string base = prefix + ".conv" + std::to_string(i);
            kernels_.push_back(store.add_glorot(base + ".kernel", {plan[i], c_in, 3}, c_in * 3, plan[i] * 3, rng));
            biases_.push_back(store.add(base + ".bias", {plan[i]}, std::vector<double>(plan[i], 0.0)));
            c_in = plan[i];
        }
    }

    diff::Tensor operator()(diff::Tensor x) const {
        for (std::size_t i = 0; i < kernels_.size(); ++i) {
            x = diff::conv1d(x, kernels_[i], biases_[i]);
            if (i + 1 < kernels_.size()) x = diff::elu(x);
        }
        return x;
    }

    /// Parameter count of a ConvNet with this channel plan.
    static std::size_t parameter_count(std::size_t in_channels, const std::vector<std::size_t>& plan) {
        std::size_t n = 0, c_in = in_channels;
        for (auto c : plan) {
            n += c * c_in * 3 + c;
            c_in = c;
        }
        return n;
    }

private:
    std::vector<diff::Tensor> kernels_;
    std::vector<diff::Tensor> biases_;
};

struct Dense {
    diff::Tensor weights;
    diff::Tensor bias;

    Dense() = default;
    Dense(diff::ParamStore& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng)
        : weights(store.add_glorot(name + ".weights", {out, in}, in, out, rng)),
          bias(store.add(name + ".bias", {out}, std::vector<double>(out, 0.0))) {}

    diff::Tensor operator()(const diff::Tensor& x) const { return diff::dense(x, weights, bias); }
};

/// Mean and expected-error outputs of the two learned components, in scaled units.
struct ComponentOutputs {
    diff::Tensor trend_mu, trend_err;
    diff::Tensor noise_mu, noise_err;
};

struct ModelOutput {
    diff::Tensor mu;
    diff::Tensor err;
};

/// Network inputs of one window, divided by the model's scale.
struct ScaledInputs {
    diff::Tensor noise_history;  // [1 x k]
    diff::Tensor exo;            // [channels x horizon]
    diff::Tensor trend;          // [m x horizon]
    diff::Tensor profile;        // [horizon]
    diff::Tensor spread;         // [horizon]; std or variance per variant
    diff::Tensor target;         // [horizon]
};

struct ProbabilisticForecast {
    Timestamp origin{};
    std::vector<double> mu;
    std::vector<double> err;
    Variant variant = Variant::Sigma;
};

inline const std::vector<double>& spread_of(const SampleWindow& w, Variant v) {
    return v == Variant::Sigma ? w.stats_std : w.stats_variance;
}

/// Colourful-noise, trend and statistics components joined by two
/// learnable aggregation layers.
class ProbPNNModel {
public:
    explicit ProbPNNModel(ProbPNNConfig config) : config_(std::move(config)) {
        config_.validate();
        Rng rng(mix_seed(config_.seed, 0x1417));
        const auto& plan = config_.channel_plan;
        const std::size_t k = config_.history, h = config_.horizon;
        hist_encoder_ = ConvNet(params_, "noise.hist", 1, plan, rng);
        hist_dense_ = Dense(params_, "noise.hist.dense", k, h, rng);
        exo_encoder_ = ConvNet(params_, "noise.exo", config_.exo_channels, plan, rng);
        merge_net_ = ConvNet(params_, "noise.merge", 2, plan, rng);
        noise_mu_head_ = Dense(params_, "noise.mu", h, h, rng);
        noise_err_head_ = Dense(params_, "noise.err", h, h, rng);
        trend_net_ = ConvNet(params_, "trend", config_.trend_depth, plan, rng);
        trend_mu_head_ = Dense(params_, "trend.mu", h, h, rng);
        trend_err_head_ = Dense(params_, "trend.err", h, h, rng);
        // order: statistics, trend, colourful noise
        agg_mu_ = params_.add("aggregate.mu", {3}, std::vector<double>(3, 1.0 / 3.0));
        agg_err_ = params_.add("aggregate.err", {3}, std::vector<double>(3, 1.0 / 3.0));
    }

    ProbPNNModel(const ProbPNNModel&) = delete;
    ProbPNNModel& operator=(const ProbPNNModel&) = delete;
    ProbPNNModel(ProbPNNModel&&) = default;
    ProbPNNModel& operator=(ProbPNNModel&&) = default;

    const ProbPNNConfig& config() const { return config_; }
    diff::ParamStore& params() { return params_; }
    const diff::ParamStore& params() const { return params_; }

    /// Inputs and targets are divided by this factor (the training maximum).
    double scale() const { return scale_; }
    void set_scale(double s) {
        if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("model scale must be positive and finite");
        scale_ = s;
    }

    diff::Tensor& aggregation_mu() { return agg_mu_; }
    diff::Tensor& aggregation_err() { return agg_err_; }

    /// Weights that make both aggregation layers pass only the statistics component through.
    void select_statistics_only() {
        auto m = agg_mu_.data();
        auto e = agg_err_.data();
        std::fill(m.begin(), m.end(), 0.0);
        std::fill(e.begin(), e.end(), 0.0);
        m[0] = 1.0;
        e[0] = 1.0;
    }

    /// Closed-form parameter count for a configuration.
    static std::size_t parameter_count(const ProbPNNConfig& c) {
        const auto& plan = c.channel_plan;
        const std::size_t h = c.horizon;
        const std::size_t dense_hh = h * h + h;
        return ConvNet::parameter_count(1, plan) + (c.history * h + h) + ConvNet::parameter_count(c.exo_channels, plan) +
               ConvNet::parameter_count(2, plan) + 2 * dense_hh + ConvNet::parameter_count(c.trend_depth, plan) +
               2 * dense_hh + 6;
    }

    void check_window(const SampleWindow& w) const {
        const std::size_t k = config_.history, h = config_.horizon, m = config_.trend_depth;
        if (w.noise_history.size() != k || w.trend_input.size() != h * m || w.exo_channels != config_.exo_channels ||
            w.exo.size() != (k + h) * config_.exo_channels || w.stats_profile.size() != h ||
            w.stats_std.size() != h || w.stats_variance.size() != h || w.target.size() != h)
            throw ConfigError("window shape does not match the model configuration");
    }

    ScaledInputs scaled_inputs(const SampleWindow& w) const {
        check_window(w);
        const std::size_t k = config_.history, h = config_.horizon, m = config_.trend_depth;
        const std::size_t c = config_.exo_channels;
        const double inv = 1.0 / scale_;
        const double spread_inv = config_.variant == Variant::Sigma ? inv : inv * inv;
        ScaledInputs in;
        std::vector<double> noise(k);
        for (std::size_t i = 0; i < k; ++i) noise[i] = w.noise_history[i] * inv;
        in.noise_history = diff::Tensor({1, k}, std::move(noise));
        // exogenous encoder sees the horizon part of the slice, transposed to channels-first
        std::vector<double> exo(c * h);
        for (std::size_t t = 0; t < h; ++t)
            for (std::size_t ch = 0; ch < c; ++ch) exo[ch * h + t] = w.exo[(k + t) * c + ch];
        in.exo = diff::Tensor({c, h}, std::move(exo));
        std::vector<double> trend(m * h);
        for (std::size_t t = 0; t < h; ++t)
            for (std::size_t j = 0; j < m; ++j) trend[j * h + t] = w.trend_input[t * m + j] * inv;
        in.trend = diff::Tensor({m, h}, std::move(trend));
        auto scaled = [](const std::vector<double>& v, double f) {
            std::vector<double> out(v.size());
            for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] * f;
            return diff::Tensor::vector(std::move(out));
        };
        in.profile = scaled(w.stats_profile, inv);
        in.spread = scaled(spread_of(w, config_.variant), spread_inv);
        in.target = scaled(w.target, inv);
        return in;
    }

    ComponentOutputs components(const ScaledInputs& in) const {
        ComponentOutputs out;
        auto hist = hist_dense_(diff::flatten(hist_encoder_(in.noise_history)));
        auto exo = diff::flatten(exo_encoder_(in.exo));
        auto merged = diff::flatten(merge_net_(diff::concat_new_axis(hist, exo)));
        out.noise_mu = noise_mu_head_(merged);
        out.noise_err = noise_err_head_(merged);
        auto trend = diff::flatten(trend_net_(in.trend));
        out.trend_mu = trend_mu_head_(trend);
        out.trend_err = trend_err_head_(trend);
        return out;
    }

    /// Differentiable forward pass in scaled units (no error clamping).
    ModelOutput forward(const ScaledInputs& in) const {
        auto c = components(in);
        return {diff::weighted_sum({in.profile, c.trend_mu, c.noise_mu}, agg_mu_),
                diff::weighted_sum({in.spread, c.trend_err, c.noise_err}, agg_err_)};
    }

    /// Forecast in original units. The aggregation is evaluated directly on
    /// the raw statistics, so statistics-only weights reproduce them exactly.
    ProbabilisticForecast predict(const SampleWindow& w) const {
        const auto in = scaled_inputs(w);
        const auto c = components(in);
        const std::size_t h = config_.horizon;
        const double err_scale = config_.variant == Variant::Sigma ? scale_ : scale_ * scale_;
        const auto& spread = spread_of(w, config_.variant);
        const auto wm = agg_mu_.data();
        const auto we = agg_err_.data();
        ProbabilisticForecast f;
        f.origin = w.origin_time;
        f.variant = config_.variant;
        f.mu.resize(h);
        f.err.resize(h);
        for (std::size_t i = 0; i < h; ++i) {
            double mu = 0.0;
            mu += wm[0] * w.stats_profile[i];
            mu += wm[1] * (c.trend_mu.data()[i] * scale_);
            mu += wm[2] * (c.noise_mu.data()[i] * scale_);
            double err = 0.0;
            err += we[0] * spread[i];
            err += we[1] * (c.trend_err.data()[i] * err_scale);
            err += we[2] * (c.noise_err.data()[i] * err_scale);
            f.mu[i] = mu;
            f.err[i] = std::max(err, config_.err_floor);
        }
        return f;
    }

private:
    ProbPNNConfig config_;
    diff::ParamStore params_;
    double scale_ = 1.0;
    ConvNet hist_encoder_;
    Dense hist_dense_;
    ConvNet exo_encoder_;
    ConvNet merge_net_;
    Dense noise_mu_head_, noise_err_head_;
    ConvNet trend_net_;
    Dense trend_mu_head_, trend_err_head_;
    diff::Tensor agg_mu_, agg_err_;
};

/// Largest absolute value seen in the windows' histories and targets; the
/// default input scale.
inline double training_scale(const std::vector<SampleWindow>& windows) {
    double s = 0.0;
    for (const auto& w : windows) {
        for (double x : w.history) s = std::max(s, std::fabs(x));
        for (double x : w.target) s = std::max(s, std::fabs(x));
    }
    return s > 0.0 ? s : 1.0;
}

}  // namespace probpnn
