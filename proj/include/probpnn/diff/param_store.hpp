#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "probpnn/diff/tensor.hpp"
#include "probpnn/random.hpp"

namespace probpnn::diff {

struct Parameter {
    std::string name;
    Tensor value;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
};

/// Named trainable tensors in insertion order, plus Adam state.
class ParamStore {
public:
    Tensor& add(const std::string& name, Shape shape, std::vector<double> init) {
        if (index_.count(name)) throw ConfigError("duplicate parameter name '" + name + "'");
        Tensor t(std::move(shape), std::move(init), true);
        const auto n = t.size();
        index_[name] = params_.size();
        params_.push_back({name, t, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)});
        return params_.back().value;
    }

    /// Glorot-uniform initialisation in +-sqrt(6 / (fan_in + fan_out)).
    Tensor& add_glorot(const std::string& name, Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        std::vector<double> init(shape_size(shape));
        for (auto& x : init) x = rng.uniform(-limit, limit);
        return add(name, std::move(shape), std::move(init));
    }

    Tensor& get(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw ConfigError("unknown parameter '" + name + "'");
        return params_[it->second].value;
    }
    const Tensor& get(const std::string& name) const { return const_cast<ParamStore*>(this)->get(name); }
    bool contains(const std::string& name) const { return index_.count(name) > 0; }

    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }
    std::size_t size() const { return params_.size(); }
    std::size_t step_count() const { return step_; }

    std::size_t element_count() const {
        std::size_t n = 0;
        for (const auto& p : params_) n += p.value.size();
        return n;
    }

    void zero_grad() {
        for (auto& p : params_) p.value.zero_grad();
    }

    void increment_step() { ++step_; }
    void set_step(std::size_t step) { step_ = step; }

private:
    std::vector<Parameter> params_;
    std::map<std::string, std::size_t> index_;
    std::size_t step_ = 0;
};

struct AdamOptions {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One bias-corrected Adam update from the gradients held by each parameter.
inline void adam_step(ParamStore& store, const AdamOptions& opt) {
    for (auto& p : store.parameters()) {
        if (!p.value.has_grad()) continue;
        for (double g : p.value.grad())
            if (!std::isfinite(g)) throw InvariantError("non-finite gradient for parameter '" + p.name + "'");
    }
    store.increment_step();
    const double t = static_cast<double>(store.step_count());
    const double c1 = 1.0 - std::pow(opt.beta1, t);
    const double c2 = 1.0 - std::pow(opt.beta2, t);
    for (auto& p : store.parameters()) {
        if (!p.value.has_grad()) continue;
        auto w = p.value.data();
        auto g = p.value.grad();
        for (std::size_t i = 0; i < w.size(); ++i) {
            p.first_moment[i] = opt.beta1 * p.first_moment[i] + (1.0 - opt.beta1) * g[i];
            p.second_moment[i] = opt.beta2 * p.second_moment[i] + (1.0 - opt.beta2) * g[i] * g[i];
            const double m_hat = p.first_moment[i] / c1;
            const double v_hat = p.second_moment[i] / c2;
            w[i] -= opt.learning_rate * m_hat / (std::sqrt(v_hat) + opt.epsilon);
        }
    }
}

inline constexpr int kCheckpointFormatVersion = 1;

/// Checkpoint document: {"format_version", "parameters": [{"name", "shape", "values"}]}.
/// Doubles are written in shortest round-trip form, so values reload bit-exactly.
inline nlohmann::json checkpoint_json(const ParamStore& store) {
    nlohmann::json doc;
    doc["format_version"] = kCheckpointFormatVersion;
    doc["parameters"] = nlohmann::json::array();
    for (const auto& p : store.parameters()) {
        nlohmann::json entry;
        entry["name"] = p.name;
        entry["shape"] = p.value.shape();
        entry["values"] = std::vector<double>(p.value.data().begin(), p.value.data().end());
        doc["parameters"].push_back(std::move(entry));
    }
    return doc;
}

inline void save_checkpoint(const std::string& path, const ParamStore& store) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write checkpoint '" + path + "'");
    out << checkpoint_json(store).dump() << '\n';
}

/// Copies checkpoint values into an already built store; names and shapes must match.
inline void load_checkpoint_json(const nlohmann::json& doc, ParamStore& store) {
    if (doc.value("format_version", 0) != kCheckpointFormatVersion)
        throw DataError("unsupported checkpoint format version");
    const auto& params = doc.at("parameters");
    if (params.size() != store.size()) throw DataError("checkpoint parameter count does not match the model");
    for (const auto& entry : params) {
        const auto name = entry.at("name").get<std::string>();
        if (!store.contains(name)) throw DataError("checkpoint has unknown parameter '" + name + "'");
        auto& t = store.get(name);
        if (entry.at("shape").get<Shape>() != t.shape())
            throw DataError("checkpoint shape mismatch for '" + name + "'");
        const auto values = entry.at("values").get<std::vector<double>>();
        std::copy(values.begin(), values.end(), t.data().begin());
    }
}

inline void load_checkpoint(const std::string& path, ParamStore& store) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read checkpoint '" + path + "'");
    load_checkpoint_json(nlohmann::json::parse(in), store);
}

}  // namespace probpnn::diff
