#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "probpnn/diff/tensor.hpp"

namespace probpnn::diff {

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError("shape mismatch: " + what);
}

inline void accumulate(Node& parent, std::span<const double> g) {
    if (!parent.requires_grad) return;
    auto& pg = parent.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
}

}  // namespace detail

/// Cross-correlation of [c_in x L] with [c_out x c_in x 3] kernels, zero
/// padding of one on each side, so the output keeps length L.
inline Tensor conv1d(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
    detail::require(input.rank() == 2, "conv1d input must be [channels x length], got " + shape_string(input.shape()));
    detail::require(kernels.rank() == 3 && kernels.dim(2) == 3 && kernels.dim(1) == input.dim(0),
                    "conv1d kernels " + shape_string(kernels.shape()) + " vs input " + shape_string(input.shape()));
    detail::require(bias.rank() == 1 && bias.dim(0) == kernels.dim(0), "conv1d bias " + shape_string(bias.shape()));
    const std::size_t cin = input.dim(0), len = input.dim(1), cout = kernels.dim(0);
    const auto x = input.data();
    const auto k = kernels.data();
    const auto b = bias.data();
    std::vector<double> out(cout * len);
    for (std::size_t co = 0; co < cout; ++co) {
        double* o = out.data() + co * len;
        for (std::size_t t = 0; t < len; ++t) o[t] = b[co];
        for (std::size_t ci = 0; ci < cin; ++ci) {
            const double* xi = x.data() + ci * len;
            const double* kk = k.data() + (co * cin + ci) * 3;
            // tap 0 reads x[t-1], tap 1 x[t], tap 2 x[t+1]
            for (std::size_t t = 1; t < len; ++t) o[t] += kk[0] * xi[t - 1];
            for (std::size_t t = 0; t < len; ++t) o[t] += kk[1] * xi[t];
            for (std::size_t t = 0; t + 1 < len; ++t) o[t] += kk[2] * xi[t + 1];
        }
    }
    return Tensor::from_op({cout, len}, std::move(out), {input, kernels, bias}, [cin, len, cout](Node& self) {
        Node& in = *self.parents[0];
        Node& ker = *self.parents[1];
        Node& bs = *self.parents[2];
        const double* g = self.grad.data();
        if (bs.requires_grad) {
            auto& gb = bs.grad_buffer();
            for (std::size_t co = 0; co < cout; ++co) {
                double s = 0.0;
                for (std::size_t t = 0; t < len; ++t) s += g[co * len + t];
                gb[co] += s;
            }
        }
        if (ker.requires_grad) {
            auto& gk = ker.grad_buffer();
            for (std::size_t co = 0; co < cout; ++co) {
                const double* go = g + co * len;
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    const double* xi = in.data.data() + ci * len;
                    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
                    for (std::size_t t = 1; t < len; ++t) s0 += go[t] * xi[t - 1];
                    for (std::size_t t = 0; t < len; ++t) s1 += go[t] * xi[t];
                    for (std::size_t t = 0; t + 1 < len; ++t) s2 += go[t] * xi[t + 1];
                    double* kk = gk.data() + (co * cin + ci) * 3;
                    kk[0] += s0;
                    kk[1] += s1;
                    kk[2] += s2;
                }
            }
        }
        if (in.requires_grad) {
            auto& gx = in.grad_buffer();
            for (std::size_t co = 0; co < cout; ++co) {
                const double* go = g + co * len;
                for (std::size_t ci = 0; ci < cin; ++ci) {
                    const double* kk = ker.data.data() + (co * cin + ci) * 3;
                    double* xi = gx.data() + ci * len;
                    for (std::size_t t = 1; t < len; ++t) xi[t - 1] += kk[0] * go[t];
                    for (std::size_t t = 0; t < len; ++t) xi[t] += kk[1] * go[t];
                    for (std::size_t t = 0; t + 1 < len; ++t) xi[t + 1] += kk[2] * go[t];
                }
            }
        }
    });
}

/// weights [out x n] times input [n] plus bias [out].
inline Tensor dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    detail::require(input.rank() == 1, "dense input must be rank 1, got " + shape_string(input.shape()));
    detail::require(weights.rank() == 2 && weights.dim(1) == input.dim(0),
                    "dense weights " + shape_string(weights.shape()) + " vs input " + shape_string(input.shape()));
    detail::require(bias.rank() == 1 && bias.dim(0) == weights.dim(0), "dense bias " + shape_string(bias.shape()));
    const std::size_t n = input.dim(0), m = weights.dim(0);
    const auto x = input.data();
    const auto w = weights.data();
    const auto b = bias.data();
    std::vector<double> out(m);
    for (std::size_t r = 0; r < m; ++r) {
        double s = b[r];
        const double* row = w.data() + r * n;
        for (std::size_t c = 0; c < n; ++c) s += row[c] * x[c];
        out[r] = s;
    }
    return Tensor::from_op({m}, std::move(out), {input, weights, bias}, [n, m](Node& self) {
        Node& in = *self.parents[0];
        Node& wt = *self.parents[1];
        Node& bs = *self.parents[2];
        const double* g = self.grad.data();
        detail::accumulate(bs, self.grad);
        if (wt.requires_grad) {
            auto& gw = wt.grad_buffer();
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < n; ++c) gw[r * n + c] += g[r] * in.data[c];
        }
        if (in.requires_grad) {
            auto& gx = in.grad_buffer();
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < n; ++c) gx[c] += g[r] * wt.data[r * n + c];
        }
    });
}

/// Exponential linear unit with alpha = 1.
inline Tensor elu(const Tensor& input) {
    std::vector<double> out(input.size());
    const auto x = input.data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0.0 ? x[i] : std::expm1(x[i]);
    return Tensor::from_op(input.shape(), std::move(out), {input}, [](Node& self) {
        Node& in = *self.parents[0];
        auto& gx = in.grad_buffer();
        for (std::size_t i = 0; i < gx.size(); ++i)
            gx[i] += self.grad[i] * (in.data[i] > 0.0 ? 1.0 : self.data[i] + 1.0);
    });
}

/// Stacks two equally shaped tensors along a new leading axis.
inline Tensor concat_new_axis(const Tensor& a, const Tensor& b) {
    detail::require(a.shape() == b.shape(), shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    Shape shape{2};
    shape.insert(shape.end(), a.shape().begin(), a.shape().end());
    std::vector<double> out(a.data().begin(), a.data().end());
    out.insert(out.end(), b.data().begin(), b.data().end());
    const std::size_t n = a.size();
    return Tensor::from_op(std::move(shape), std::move(out), {a, b}, [n](Node& self) {
        std::span<const double> g(self.grad);
        detail::accumulate(*self.parents[0], g.subspan(0, n));
        detail::accumulate(*self.parents[1], g.subspan(n, n));
    });
}

inline Tensor reshape(const Tensor& input, Shape shape) {
    detail::require(shape_size(shape) == input.size(), "cannot reshape " + shape_string(input.shape()) + " to " +
                                                            shape_string(shape));
    std::vector<double> out(input.data().begin(), input.data().end());
    return Tensor::from_op(std::move(shape), std::move(out), {input},
                           [](Node& self) { detail::accumulate(*self.parents[0], self.grad); });
}

inline Tensor flatten(const Tensor& input) { return reshape(input, {input.size()}); }

/// sum_i weights[i] * inputs[i]; `weights` holds one scalar per input.
inline Tensor weighted_sum(const std::vector<Tensor>& inputs, const Tensor& weights) {
    detail::require(!inputs.empty(), "weighted_sum needs at least one input");
    detail::require(weights.rank() == 1 && weights.dim(0) == inputs.size(),
                    "weighted_sum weights " + shape_string(weights.shape()) + " for " +
                        std::to_string(inputs.size()) + " inputs");
    const auto& shape = inputs.front().shape();
    for (const auto& x : inputs) detail::require(x.shape() == shape, "weighted_sum inputs differ in shape");
    const auto w = weights.data();
    std::vector<double> out(inputs.front().size(), 0.0);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const auto x = inputs[k].data();
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[k] * x[i];
    }
    std::vector<Tensor> parents = inputs;
    parents.push_back(weights);
    const std::size_t count = inputs.size();
    return Tensor::from_op(shape, std::move(out), std::move(parents), [count](Node& self) {
        Node& wt = *self.parents[count];
        for (std::size_t k = 0; k < count; ++k) {
            Node& x = *self.parents[k];
            if (wt.requires_grad) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.data.size(); ++i) s += self.grad[i] * x.data[i];
                wt.grad_buffer()[k] += s;
            }
            if (x.requires_grad) {
                auto& gx = x.grad_buffer();
                for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += wt.data[k] * self.grad[i];
            }
        }
    });
}

// Elementwise helpers used by the losses.

inline Tensor sub(const Tensor& a, const Tensor& b) {
    detail::require(a.shape() == b.shape(), shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
        detail::accumulate(*self.parents[0], self.grad);
        Node& rhs = *self.parents[1];
        if (rhs.requires_grad) {
            auto& g = rhs.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
        }
    });
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    detail::require(a.shape() == b.shape(), shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
    return Tensor::from_op(a.shape(), std::move(out), {a, b}, [](Node& self) {
        detail::accumulate(*self.parents[0], self.grad);
        detail::accumulate(*self.parents[1], self.grad);
    });
}

inline Tensor scale(const Tensor& a, double factor) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = factor * a.data()[i];
    return Tensor::from_op(a.shape(), std::move(out), {a}, [factor](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
    });
}

/// |x| with subgradient 0 at x = 0.
inline Tensor abs(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::fabs(a.data()[i]);
    return Tensor::from_op(a.shape(), std::move(out), {a}, [](Node& self) {
        Node& in = *self.parents[0];
        auto& g = in.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = in.data[i];
            g[i] += self.grad[i] * (x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0));
        }
    });
}

inline Tensor square(const Tensor& a) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * a.data()[i];
    return Tensor::from_op(a.shape(), std::move(out), {a}, [](Node& self) {
        Node& in = *self.parents[0];
        auto& g = in.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * in.data[i] * self.grad[i];
    });
}

/// Mean over all elements, as a [1] tensor.
inline Tensor mean(const Tensor& a) {
    detail::require(a.size() > 0, "mean of empty tensor");
    double s = 0.0;
    for (double x : a.data()) s += x;
    const double inv = 1.0 / static_cast<double>(a.size());
    return Tensor::from_op({1}, {s * inv}, {a}, [inv](Node& self) {
        auto& g = self.parents[0]->grad_buffer();
        for (auto& x : g) x += inv * self.grad[0];
    });
}

}  // namespace probpnn::diff
