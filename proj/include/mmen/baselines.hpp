#pragma once

#include "mmen/graph.hpp"
#include "mmen/objective.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace mmen {

/// Per-node scores of one centrality method.
struct RankedScores {
    std::string method;
    std::vector<double> scores;

    /// Nodes by descending score, NodeId breaking ties.
    std::vector<NodeId> order() const { return rank_nodes(scores); }
    SeedSet top(double fraction) const { return select_seeds(scores, fraction); }
};

/// Undirected degree.
inline RankedScores degree_centrality(const CascadeGraph &g) {
    RankedScores r{"degree", std::vector<double>(g.num_nodes())};
    for (NodeId v = 0; v < g.num_nodes(); ++v) r.scores[v] = static_cast<double>(g.undirected_degree(v));
    return r;
}

/// K-shell index on the undirected view (bucket-based core decomposition).
inline RankedScores kshell(const CascadeGraph &g) {
    const std::size_t n = g.num_nodes();
    std::vector<std::size_t> deg(n);
    std::size_t max_deg = 0;
    for (NodeId v = 0; v < n; ++v) max_deg = std::max(max_deg, deg[v] = g.undirected_degree(v));

    // Nodes sorted by current degree; pos/bin let a decrement move a node one bucket down.
    std::vector<std::size_t> bin(max_deg + 2, 0), pos(n);
    std::vector<NodeId> vert(n);
    for (NodeId v = 0; v < n; ++v) ++bin[deg[v]];
    std::size_t start = 0;
    for (std::size_t d = 0; d <= max_deg; ++d) {
        const std::size_t count = bin[d];
        bin[d] = start;
        start += count;
    }
    for (NodeId v = 0; v < n; ++v) {
        pos[v] = bin[deg[v]]++;
        vert[pos[v]] = v;
    }
    for (std::size_t d = max_deg + 1; d-- > 1;) bin[d] = bin[d - 1];
    bin[0] = 0;

    for (std::size_t i = 0; i < n; ++i) {
        const NodeId v = vert[i];
        for (NodeId u : g.neighbors(v)) {
            if (deg[u] > deg[v]) {
                const std::size_t du = deg[u], pu = pos[u], pw = bin[du];
                const NodeId w = vert[pw];
                if (u != w) {
                    std::swap(vert[pu], vert[pw]);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                ++bin[du];
                --deg[u];
            }
        }
    }
    RankedScores r{"kshell", std::vector<double>(n)};
    for (NodeId v = 0; v < n; ++v) r.scores[v] = static_cast<double>(deg[v]);
    return r;
}

/// H-index: largest h such that v has at least h neighbors of degree >= h.
inline RankedScores h_index(const CascadeGraph &g) {
    RankedScores r{"hindex", std::vector<double>(g.num_nodes())};
    std::vector<std::size_t> nd;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        nd.clear();
        for (NodeId u : g.neighbors(v)) nd.push_back(g.undirected_degree(u));
        std::sort(nd.begin(), nd.end(), std::greater<>());
        std::size_t h = 0;
        while (h < nd.size() && nd[h] >= h + 1) ++h;
        r.scores[v] = static_cast<double>(h);
    }
    return r;
}

/// LeaderRank. A ground node is linked both ways to every node and a unit of
/// score per node is spread by a uniform random walk until the L1 change drops
/// below `tol`; the ground node's score is then shared equally, so scores sum
/// to N. The walk moves from retweeter to retweeted (dst -> src), so nodes
/// whose posts are widely retweeted collect score.
inline RankedScores leaderrank(const CascadeGraph &g, double tol = 1e-10, std::size_t max_iter = 100000) {
    const std::size_t n = g.num_nodes();
    // Without edges the walk alternates between the ground node and the rest.
    if (g.num_edges() == 0) return RankedScores{"leaderrank", std::vector<double>(n, 1.0)};
    // Out-degree of the walk: in-edges reversed plus the ground link.
    std::vector<double> inv_out(n);
    for (NodeId v = 0; v < n; ++v) inv_out[v] = 1.0 / static_cast<double>(g.in_degree(v) + 1);
    std::vector<double> s(n, 1.0), next(n);
    double ground = 0.0;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        const double ground_share = ground / static_cast<double>(n);
        double next_ground = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            double acc = ground_share;
            // v receives from every node that retweeted it (edges v -> w walk w -> v).
            for (NodeId w : g.out_neighbors(v)) acc += s[w] * inv_out[w];
            next[v] = acc;
            next_ground += s[v] * inv_out[v];
        }
        double delta = std::abs(next_ground - ground);
        for (NodeId v = 0; v < n; ++v) delta += std::abs(next[v] - s[v]);
        s.swap(next);
        ground = next_ground;
        if (delta < tol) {
            RankedScores r{"leaderrank", std::move(s)};
            for (double &x : r.scores) x += ground / static_cast<double>(n);
            return r;
        }
    }
    throw NumericError("leaderrank did not converge within " + std::to_string(max_iter) + " iterations");
}

/// Greedy maximum d-coverage: repeatedly pick the node whose downstream
/// d-hop set contains the most still-uncovered nodes (ties to the smaller id).
/// Once everything is covered, remaining picks go by undirected degree.
inline SeedSet greedy_dcover(const CascadeGraph &g, std::size_t budget, std::size_t d) {
    if (budget < 1) throw ArgumentError("greedy_dcover: budget must be >= 1");
    const std::size_t n = g.num_nodes();
    budget = std::min(budget, n);
    std::vector<bool> covered(n, false), chosen(n, false);
    std::size_t uncovered = n;
    SeedSet out;
    out.fraction = n ? static_cast<double>(budget) / static_cast<double>(n) : 0.0;
    while (out.members.size() < budget && uncovered > 0) {
        std::size_t best_gain = 0;
        NodeId best = 0;
        bool found = false;
        for (NodeId u = 0; u < n; ++u) {
            if (chosen[u]) continue;
            std::size_t gain = 0;
            for (NodeId w : downstream_coverage(g, u, d)) gain += covered[w] ? 0 : 1;
            if (!found || gain > best_gain) {
                best_gain = gain;
                best = u;
                found = true;
            }
        }
        chosen[best] = true;
        out.members.push_back(best);
        for (NodeId w : downstream_coverage(g, best, d))
            if (!covered[w]) {
                covered[w] = true;
                --uncovered;
            }
    }
    if (out.members.size() < budget) {
        for (NodeId v : degree_centrality(g).order()) {
            if (out.members.size() == budget) break;
            if (!chosen[v]) {
                chosen[v] = true;
                out.members.push_back(v);
            }
        }
    }
    return out;
}

/// Number of nodes covered within d downstream hops by a seed set.
inline std::size_t coverage_count(const CascadeGraph &g, std::span<const NodeId> seeds, std::size_t d) {
    std::vector<bool> covered(g.num_nodes(), false);
    std::size_t count = 0;
    for (NodeId s : seeds)
        for (NodeId w : downstream_coverage(g, s, d))
            if (!covered[w]) {
                covered[w] = true;
                ++count;
            }
    return count;
}

} // namespace mmen
