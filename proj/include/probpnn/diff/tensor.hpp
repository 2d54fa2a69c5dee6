#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "probpnn/error.hpp"

namespace probpnn::diff {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_string(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) s += (i ? "x" : "") + std::to_string(shape[i]);
    return s + "]";
}

struct Node {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // empty until a gradient reaches this node
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    // Reads this node's grad and accumulates into its parents' grads.
    std::function<void(Node&)> backward;

    std::vector<double>& grad_buffer() {
        if (grad.empty()) grad.assign(data.size(), 0.0);
        return grad;
    }
};

/// Dense row-major array that records the operations applied to it. Copies
/// share the underlying node.
class Tensor {
public:
    Tensor() : node_(std::make_shared<Node>()) {}

    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false) : node_(std::make_shared<Node>()) {
        if (shape_size(shape) != data.size())
            throw ConfigError("tensor data length " + std::to_string(data.size()) + " does not match shape " +
                              shape_string(shape));
        node_->shape = std::move(shape);
        node_->data = std::move(data);
        node_->requires_grad = requires_grad;
    }

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        auto n = shape_size(shape);
        return Tensor(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
    }

    static Tensor vector(std::vector<double> data, bool requires_grad = false) {
        auto n = data.size();
        return Tensor({n}, std::move(data), requires_grad);
    }

    static Tensor scalar(double value, bool requires_grad = false) { return Tensor({1}, {value}, requires_grad); }

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return node_->shape.at(axis); }
    std::size_t size() const { return node_->data.size(); }
    bool requires_grad() const { return node_->requires_grad; }

    std::span<double> data() { return node_->data; }
    std::span<const double> data() const { return node_->data; }
    double item() const {
        if (size() != 1) throw ConfigError("item() on tensor of shape " + shape_string(shape()));
        return node_->data[0];
    }

    bool has_grad() const { return !node_->grad.empty(); }
    /// Gradient buffer, allocated as zeros on first access.
    std::span<double> grad() { return node_->grad_buffer(); }
    std::span<const double> grad() const { return node_->grad_buffer(); }
    void zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

    /// Reverse pass from this tensor, seeding every element's gradient with `seed`.
    void backward(double seed = 1.0) {
        std::vector<Node*> order;
        std::unordered_set<Node*> seen;
        topo_sort(node_.get(), seen, order);
        auto& g = node_->grad_buffer();
        for (auto& x : g) x += seed;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Node* n = *it;
            if (n->backward && !n->grad.empty()) n->backward(*n);
        }
    }

    Node& node() const { return *node_; }
    const std::shared_ptr<Node>& node_ptr() const { return node_; }

    /// Result of an op over `parents`; records `backward` only if some parent needs gradients.
    static Tensor from_op(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                          std::function<void(Node&)> backward) {
        Tensor out(std::move(shape), std::move(data));
        bool needs = false;
        for (const auto& p : parents) needs = needs || p.requires_grad();
        if (needs) {
            out.node_->requires_grad = true;
            for (auto& p : parents) out.node_->parents.push_back(p.node_);
            out.node_->backward = std::move(backward);
        }
        return out;
    }

    /// Same data, no history.
    Tensor detach() const { return Tensor(shape(), node_->data); }

private:
    static void topo_sort(Node* n, std::unordered_set<Node*>& seen, std::vector<Node*>& order) {
        if (!seen.insert(n).second) return;
        for (auto& p : n->parents) topo_sort(p.get(), seen, order);
        order.push_back(n);
    }

    std::shared_ptr<Node> node_;
};

/// Throws InvariantError if any element is non-finite.
inline void check_finite(const Tensor& t, const std::string& what) {
    for (double x : t.data())
        if (!std::isfinite(x)) throw InvariantError("non-finite value in " + what);
}

}  // namespace probpnn::diff
