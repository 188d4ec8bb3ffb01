#pragma once

#include "mmen/graph.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace mmen {

struct SirConfig {
    std::optional<double> mu{}; ///< per-contact infection probability; default_mu(g) when unset
    std::size_t runs = 100;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (mu && !(*mu >= 0.0 && *mu <= 1.0)) throw ArgumentError("mu must lie in [0, 1]");
        if (runs < 1) throw ArgumentError("runs must be >= 1");
    }
};

/// 1.5x the heterogeneous mean-field epidemic threshold <k>/(<k^2>-<k>) on
/// the undirected view, capped at 1.
inline double default_mu(const CascadeGraph &g) {
    const double n = static_cast<double>(g.num_nodes());
    double k1 = 0.0, k2 = 0.0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const double k = static_cast<double>(g.undirected_degree(v));
        k1 += k;
        k2 += k * k;
    }
    k1 /= n;
    k2 /= n;
    const double denom = k2 - k1;
    if (!(denom > 0.0)) return 1.0;
    return std::min(1.0, 1.5 * k1 / denom);
}

struct SirOutcome {
    std::size_t recovered = 0; ///< nodes ever infected
    std::size_t steps = 0;
};

/// Discrete-time SIR with certain recovery: every step each infected node
/// tries each susceptible neighbor once with probability mu, then recovers.
/// Runs until no node is infected.
inline SirOutcome sir_run(const CascadeGraph &g, std::span<const NodeId> seeds, double mu, std::mt19937_64 &rng) {
    if (seeds.empty()) throw ArgumentError("sir_run: seed set is empty");
    enum : unsigned char { S, I, R };
    std::vector<unsigned char> state(g.num_nodes(), S);
    std::vector<NodeId> infected, next;
    for (NodeId s : seeds) {
        g.check_node(s);
        if (state[s] == S) {
            state[s] = I;
            infected.push_back(s);
        }
    }
    SirOutcome out;
    while (!infected.empty()) {
        ++out.steps;
        next.clear();
        for (NodeId u : infected)
            for (NodeId w : g.neighbors(u))
                if (state[w] == S && rng::uniform01(rng) < mu) {
                    state[w] = I;
                    next.push_back(w);
                }
        for (NodeId u : infected) state[u] = R;
        out.recovered += infected.size();
        infected.swap(next);
    }
    return out;
}

struct InfectionRate {
    double mean = 0.0;
    double std_error = 0.0;
    double mu = 0.0;
};

/// Mean and standard error of the final infected fraction over `runs`
/// independent simulations; run r draws from its own stream.
inline InfectionRate infection_rate(const CascadeGraph &g, std::span<const NodeId> seeds, const SirConfig &cfg) {
    cfg.validate();
    const double mu = cfg.mu.value_or(default_mu(g));
    const double n = static_cast<double>(g.num_nodes());
    // Welford keeps the variance exactly 0 when every run agrees.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        auto rng = rng::stream(cfg.rng_seed, r);
        const double frac = static_cast<double>(sir_run(g, seeds, mu, rng).recovered) / n;
        const double delta = frac - mean;
        mean += delta / static_cast<double>(r + 1);
        m2 += delta * (frac - mean);
    }
    const double runs = static_cast<double>(cfg.runs);
    InfectionRate out;
    out.mu = mu;
    out.mean = mean;
    if (cfg.runs > 1) out.std_error = std::sqrt(std::max(0.0, m2 / (runs - 1.0)) / runs);
    return out;
}

/// R = (largest weakly connected component after removing the seeds) / N.
inline double robustness(const CascadeGraph &g, std::span<const NodeId> seeds) {
    if (g.num_nodes() == 0) return 0.0;
    return static_cast<double>(largest_component_size(g, seeds)) / static_cast<double>(g.num_nodes());
}

} // namespace mmen
