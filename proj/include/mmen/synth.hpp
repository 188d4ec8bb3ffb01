#pragma once

#include "mmen/graph.hpp"

#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace mmen {

namespace detail {

inline std::string random_text(std::mt19937_64 &rng, std::size_t len, bool spaces) {
    static constexpr char kLetters[] = "abcdefghijklmnopqrstuvwxyz";
    std::string s;
    s.reserve(len);
    for (std::size_t i = 0; i < len; ++i) {
        if (spaces && i > 0 && rng::below(rng, 6) == 0)
            s.push_back(' ');
        else
            s.push_back(kLetters[rng::below(rng, 26)]);
    }
    return s;
}

} // namespace detail

/// Synthetic retweet cascade: a preferential-attachment tree grown from node 0
/// plus round(extra_edge_frac * n) extra retweet edges that point from earlier
/// to later nodes (so node 0 stays the only root). Follower counts scale with
/// out-degree times lognormal noise of width `attr_noise`. A few profile fields
/// are dropped at random to exercise the missing-value path.
inline CascadeGraph synth_cascade(std::size_t n_nodes, double extra_edge_frac, double attr_noise,
                                  std::uint64_t rng_seed) {
    if (n_nodes < 10) throw ArgumentError("synth_cascade: n_nodes must be >= 10");
    if (!std::isfinite(extra_edge_frac) || extra_edge_frac < 0.0)
        throw ArgumentError("synth_cascade: extra_edge_frac must be finite and >= 0");
    if (!std::isfinite(attr_noise) || attr_noise < 0.0)
        throw ArgumentError("synth_cascade: attr_noise must be finite and >= 0");

    auto rng = rng::stream(rng_seed, 0x5eed);
    std::vector<Edge> edges;
    edges.reserve(n_nodes - 1);
    std::set<Edge> present;
    // Each node appears once plus once per child, so attachment is prop. to out-degree + 1.
    std::vector<NodeId> urn{0};
    std::vector<double> delay(n_nodes, 0.0);
    for (NodeId t = 1; t < n_nodes; ++t) {
        const NodeId parent = urn[rng::below(rng, urn.size())];
        edges.emplace_back(parent, t);
        present.emplace(parent, t);
        delay[t] = delay[parent] + rng::exponential(rng, 300.0);
        urn.push_back(parent);
        urn.push_back(t);
    }

    const auto extra = static_cast<std::size_t>(std::llround(extra_edge_frac * static_cast<double>(n_nodes)));
    for (std::size_t e = 0; e < extra; ++e) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            const auto dst = static_cast<NodeId>(2 + rng::below(rng, n_nodes - 2));
            const NodeId src = urn[rng::below(rng, urn.size())];
            if (src >= dst || present.count({src, dst})) continue;
            edges.emplace_back(src, dst);
            present.emplace(src, dst);
            urn.push_back(src);
            break;
        }
    }

    std::vector<std::size_t> out_deg(n_nodes, 0);
    for (const auto &[s, d] : edges) ++out_deg[s];

    std::vector<UserRecord> users(n_nodes);
    auto keep = [&] { return rng::below(rng, 100) >= 3; };
    for (NodeId v = 0; v < n_nodes; ++v) {
        UserRecord &u = users[v];
        if (keep()) u.name = detail::random_text(rng, 4 + rng::below(rng, 12), false);
        if (keep()) u.description = detail::random_text(rng, 1 + rng::below(rng, 120), true);
        const double followers =
            30.0 * static_cast<double>(1 + out_deg[v]) * std::exp(attr_noise * rng::normal(rng)) +
            static_cast<double>(rng::below(rng, 20));
        if (keep()) u.followers_count = static_cast<std::uint64_t>(followers);
        if (keep()) u.friends_count = static_cast<std::uint64_t>(std::exp(4.0 + rng::normal(rng)));
        if (keep()) u.statuses_count = static_cast<std::uint64_t>(std::exp(6.0 + 1.5 * rng::normal(rng)));
        if (keep()) u.verified = rng::uniform01(rng) < std::min(0.9, followers / 5000.0);
        if (keep()) u.geo_enabled = rng::uniform01(rng) < 0.3;
        if (v != 0) u.retweet_delay_s = delay[v];
    }
    return CascadeGraph(n_nodes, std::move(edges), std::move(users), NodeId{0});
}

} // namespace mmen
