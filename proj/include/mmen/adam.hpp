#pragma once

#include "mmen/param_store.hpp"

#include <cmath>

namespace mmen {

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step = 0;
    Gradients first;  ///< m, shaped like the parameters
    Gradients second; ///< v

    AdamState() = default;
    explicit AdamState(const ParamStore &ps) : first(ps.zero_gradients()), second(ps.zero_gradients()) {}
};

/// One bias-corrected Adam update in place.
inline void adam_step(ParamStore &params, const Gradients &grads, AdamState &state, double lr) {
    if (grads.size() != params.size() || state.first.size() != params.size())
        throw ArgumentError("adam_step: gradient/state layout does not match parameters");
    ++state.step;
    const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor &p = params.value(i);
        if (!p.same_shape(grads[i])) throw ArgumentError("adam_step: shape mismatch for '" + params.name(i) + "'");
        auto &m = state.first[i].data;
        auto &v = state.second[i].data;
        const auto &g = grads[i].data;
        for (std::size_t k = 0; k < p.numel(); ++k) {
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
            p.data[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + state.eps);
        }
    }
}

} // namespace mmen
