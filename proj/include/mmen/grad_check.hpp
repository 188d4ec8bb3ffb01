#pragma once

#include "mmen/tape.hpp"

#include <cmath>
#include <functional>
#include <numeric>

namespace mmen {

/// Builds a scalar loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape &, const ParamStore &)>;

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
    std::size_t excluded = 0; ///< components whose +/- probes straddle a kink
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

/// Compares taped gradients with central differences. Above 10^4 components a
/// seeded 5% subsample is probed. Relative error is |a-b| / max(|a|,|b|,1e-12).
inline GradCheckResult grad_check(const LossBuilder &build, ParamStore &params, double eps = 1e-6,
                                  std::uint64_t sample_seed = 0) {
    if (!(eps >= 1e-7 && eps <= 1e-3)) throw ArgumentError("grad_check: eps must lie in [1e-7, 1e-3]");

    Gradients analytic_grads;
    {
        Tape tape;
        const Var loss = build(tape, params);
        analytic_grads = tape.backward(loss, params);
    }
    const std::vector<double> analytic = flatten(analytic_grads);
    std::vector<double> flat = params.flatten();

    std::vector<std::size_t> probe(flat.size());
    std::iota(probe.begin(), probe.end(), std::size_t{0});
    if (flat.size() > 10000) {
        auto rng = rng::stream(sample_seed, 0x9c);
        rng::shuffle(probe, rng);
        probe.resize((flat.size() + 19) / 20);
        std::sort(probe.begin(), probe.end());
    }

    auto evaluate = [&](std::vector<signed char> &signature) {
        params.assign_flat(flat);
        Tape tape;
        const Var loss = build(tape, params);
        signature = tape.kink_signature();
        return tape.value(loss).item();
    };

    GradCheckResult result;
    std::vector<signed char> sig_plus, sig_minus;
    const std::vector<double> original = flat;
    for (std::size_t i : probe) {
        flat[i] = original[i] + eps;
        const double f_plus = evaluate(sig_plus);
        flat[i] = original[i] - eps;
        const double f_minus = evaluate(sig_minus);
        flat[i] = original[i];
        if (sig_plus != sig_minus) {
            ++result.excluded;
            continue;
        }
        const double numeric = (f_plus - f_minus) / (2.0 * eps);
        const double a = analytic[i];
        const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-12});
        ++result.checked;
        if (rel > result.max_rel_error || result.checked == 1) {
            result.max_rel_error = std::max(result.max_rel_error, rel);
            result.worst_index = i;
            result.worst_analytic = a;
            result.worst_numeric = numeric;
        }
    }
    params.assign_flat(original);
    return result;
}

} // namespace mmen
