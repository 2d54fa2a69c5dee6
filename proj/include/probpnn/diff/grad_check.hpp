#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "probpnn/diff/tensor.hpp"

namespace probpnn::diff {

/// Compares reverse-mode gradients of the scalar `f` with central
/// differences for every coordinate of every tensor in `wrt`. Returns
/// max |analytic - numeric| / max(1, |analytic|, |numeric|).
inline double grad_check(const std::function<Tensor()>& f, std::vector<Tensor> wrt, double h = 1e-5) {
    for (auto& t : wrt) t.zero_grad();
    Tensor out = f();
    out.backward();
    double worst = 0.0;
    for (auto& t : wrt) {
        std::vector<double> analytic(t.grad().begin(), t.grad().end());
        auto data = t.data();
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double saved = data[i];
            data[i] = saved + h;
            const double up = f().item();
            data[i] = saved - h;
            const double down = f().item();
            data[i] = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double denom = std::max({1.0, std::fabs(analytic[i]), std::fabs(numeric)});
            worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
        }
    }
    return worst;
}

}  // namespace probpnn::diff
