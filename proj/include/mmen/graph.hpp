#pragma once

#include "mmen/common.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mmen {

using Edge = std::pair<NodeId, NodeId>;

/// Profile metadata for one user. Every field may be absent; the featurizer
/// maps absent values to 0.
struct UserRecord {
    std::optional<std::string> name;
    std::optional<std::string> description;
    std::optional<std::uint64_t> followers_count;
    std::optional<std::uint64_t> friends_count;
    std::optional<std::uint64_t> statuses_count;
    std::optional<bool> verified;
    std::optional<bool> geo_enabled;
    std::optional<double> retweet_delay_s; ///< seconds after the source post

    bool operator==(const UserRecord &) const = default;
};

/// Directed retweet graph. An edge (src, dst) means dst retweeted src.
/// Immutable after construction: edges are deduplicated, self-loops dropped,
/// adjacency is kept in CSR form for both directions.
class CascadeGraph {
  public:
    CascadeGraph() = default;

    /// Builds a graph over nodes 0..n-1. `users` may be empty (all absent) or
    /// of size n. `labels` holds the original string ids; defaults to "0".."n-1".
    CascadeGraph(std::size_t n, std::vector<Edge> edges, std::vector<UserRecord> users = {},
                 std::optional<NodeId> source = std::nullopt,
                 std::vector<std::string> labels = {})
        : n_(n), users_(std::move(users)), labels_(std::move(labels)) {
        for (const auto &[s, d] : edges)
            if (s >= n || d >= n)
                throw ArgumentError("edge (" + std::to_string(s) + "," + std::to_string(d) +
                                    ") has endpoint >= N=" + std::to_string(n));
        std::erase_if(edges, [](const Edge &e) { return e.first == e.second; });
        // Keep first-appearance order, drop later duplicates.
        std::vector<Edge> sorted = edges;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        if (sorted.size() != edges.size()) {
            std::vector<bool> seen(sorted.size(), false);
            std::vector<Edge> kept;
            kept.reserve(sorted.size());
            for (const auto &e : edges) {
                const auto idx = static_cast<std::size_t>(
                    std::lower_bound(sorted.begin(), sorted.end(), e) - sorted.begin());
                if (!seen[idx]) {
                    seen[idx] = true;
                    kept.push_back(e);
                }
            }
            edges = std::move(kept);
        }
        edges_ = std::move(edges);

        if (users_.empty()) users_.resize(n_);
        if (users_.size() != n_) throw ArgumentError("user table size does not match N");
        if (labels_.empty()) {
            labels_.reserve(n_);
            for (std::size_t i = 0; i < n_; ++i) labels_.push_back(std::to_string(i));
        }
        if (labels_.size() != n_) throw ArgumentError("label table size does not match N");

        build_csr(edges_, false, out_offsets_, out_targets_);
        build_csr(edges_, true, in_offsets_, in_targets_);
        build_undirected();

        if (source) {
            if (*source >= n_) throw ArgumentError("source out of range");
            source_ = *source;
        } else {
            source_ = detect_source();
        }
    }

    std::size_t num_nodes() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    const std::vector<Edge> &edges() const noexcept { return edges_; }
    NodeId source() const noexcept { return source_; }

    std::span<const NodeId> out_neighbors(NodeId v) const {
        return {out_targets_.data() + out_offsets_[v], out_targets_.data() + out_offsets_[v + 1]};
    }
    std::span<const NodeId> in_neighbors(NodeId v) const {
        return {in_targets_.data() + in_offsets_[v], in_targets_.data() + in_offsets_[v + 1]};
    }
    /// Neighbors in the undirected view (u~v if u->v or v->u), sorted, no repeats.
    std::span<const NodeId> neighbors(NodeId v) const {
        return {und_targets_.data() + und_offsets_[v], und_targets_.data() + und_offsets_[v + 1]};
    }

    std::size_t out_degree(NodeId v) const { return out_offsets_[v + 1] - out_offsets_[v]; }
    std::size_t in_degree(NodeId v) const { return in_offsets_[v + 1] - in_offsets_[v]; }
    std::size_t undirected_degree(NodeId v) const { return und_offsets_[v + 1] - und_offsets_[v]; }

    const UserRecord &user(NodeId v) const { return users_[v]; }
    const std::vector<UserRecord> &users() const noexcept { return users_; }
    const std::string &label(NodeId v) const { return labels_[v]; }
    const std::vector<std::string> &labels() const noexcept { return labels_; }

    void check_node(NodeId v) const {
        if (v >= n_)
            throw ArgumentError("node " + std::to_string(v) + " out of range (N=" +
                                std::to_string(n_) + ")");
    }

  private:
    void build_csr(const std::vector<Edge> &edges, bool reverse, std::vector<std::size_t> &offsets,
                   std::vector<NodeId> &targets) const {
        offsets.assign(n_ + 1, 0);
        for (const auto &[s, d] : edges) ++offsets[(reverse ? d : s) + 1];
        std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
        targets.resize(edges.size());
        std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
        for (const auto &[s, d] : edges) {
            const NodeId from = reverse ? d : s;
            targets[cursor[from]++] = reverse ? s : d;
        }
        for (std::size_t v = 0; v < n_; ++v)
            std::sort(targets.begin() + static_cast<std::ptrdiff_t>(offsets[v]),
                      targets.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]));
    }

    void build_undirected() {
        und_offsets_.assign(n_ + 1, 0);
        und_targets_.clear();
        std::vector<NodeId> buf;
        for (NodeId v = 0; v < n_; ++v) {
            buf.assign(out_neighbors(v).begin(), out_neighbors(v).end());
            buf.insert(buf.end(), in_neighbors(v).begin(), in_neighbors(v).end());
            std::sort(buf.begin(), buf.end());
            buf.erase(std::unique(buf.begin(), buf.end()), buf.end());
            und_targets_.insert(und_targets_.end(), buf.begin(), buf.end());
            und_offsets_[v + 1] = und_targets_.size();
        }
    }

    NodeId detect_source() const {
        for (NodeId v = 0; v < n_; ++v) {
            if (in_degree(v) != 0) continue;
            std::vector<bool> seen(n_, false);
            std::vector<NodeId> stack{v};
            seen[v] = true;
            std::size_t reached = 1;
            while (!stack.empty()) {
                const NodeId u = stack.back();
                stack.pop_back();
                for (NodeId w : out_neighbors(u))
                    if (!seen[w]) {
                        seen[w] = true;
                        ++reached;
                        stack.push_back(w);
                    }
            }
            if (reached == n_) return v;
        }
        return 0;
    }

    std::size_t n_ = 0;
    std::vector<Edge> edges_;
    std::vector<UserRecord> users_;
    std::vector<std::string> labels_;
    NodeId source_ = 0;
    std::vector<std::size_t> out_offsets_{0}, in_offsets_{0}, und_offsets_{0};
    std::vector<NodeId> out_targets_, in_targets_, und_targets_;
};

/// Ordered, duplicate-free set of selected nodes.
struct SeedSet {
    std::vector<NodeId> members;
    double fraction = 0.0;
};

/// Number of seeds for a top-`fraction` selection over n nodes: ceil(fraction * n).
inline std::size_t seed_budget(std::size_t n, double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw ArgumentError("seed fraction must lie in (0, 1]");
    const double raw = fraction * static_cast<double>(n);
    // Absorb representation error such as 0.07 * 100 = 7.000000000000001.
    auto k = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
    return std::clamp<std::size_t>(k, n == 0 ? 0 : 1, n);
}

namespace detail {

template <class NextFn>
std::vector<NodeId> bounded_bfs(const CascadeGraph &g, NodeId v, std::size_t depth, NextFn next) {
    g.check_node(v);
    std::vector<std::uint32_t> dist(g.num_nodes(), UINT32_MAX);
    std::vector<NodeId> frontier{v}, out{v};
    dist[v] = 0;
    for (std::size_t hop = 1; hop <= depth && !frontier.empty(); ++hop) {
        std::vector<NodeId> next_frontier;
        for (NodeId u : frontier)
            for (NodeId w : next(u))
                if (dist[w] == UINT32_MAX) {
                    dist[w] = static_cast<std::uint32_t>(hop);
                    next_frontier.push_back(w);
                    out.push_back(w);
                }
        frontier = std::move(next_frontier);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

/// Covering set of v: every u with a directed path u -> v of length <= d, plus v.
/// Selecting any member of this set covers v.
inline std::vector<NodeId> out_neighborhood(const CascadeGraph &g, NodeId v, std::size_t d) {
    if (d < 1) throw ArgumentError("hop radius d must be >= 1");
    return detail::bounded_bfs(g, v, d, [&](NodeId u) { return g.in_neighbors(u); });
}

/// Nodes covered by selecting u: u plus everything within d hops downstream.
inline std::vector<NodeId> downstream_coverage(const CascadeGraph &g, NodeId u, std::size_t d) {
    if (d < 1) throw ArgumentError("hop radius d must be >= 1");
    return detail::bounded_bfs(g, u, d, [&](NodeId w) { return g.out_neighbors(w); });
}

/// Directed BFS distances from `from`; unreachable nodes hold std::nullopt.
inline std::vector<std::optional<std::size_t>> bfs_distances(const CascadeGraph &g, NodeId from) {
    g.check_node(from);
    std::vector<std::optional<std::size_t>> dist(g.num_nodes());
    std::vector<NodeId> queue{from};
    dist[from] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const NodeId u = queue[head];
        for (NodeId w : g.out_neighbors(u))
            if (!dist[w]) {
                dist[w] = *dist[u] + 1;
                queue.push_back(w);
            }
    }
    return dist;
}

/// Hop count along directed edges, or std::nullopt when b is unreachable from a.
inline std::optional<std::size_t> shortest_path_len(const CascadeGraph &g, NodeId a, NodeId b) {
    g.check_node(b);
    return bfs_distances(g, a)[b];
}

/// Size of the largest weakly connected component after deleting `removed`.
inline std::size_t largest_component_size(const CascadeGraph &g, std::span<const NodeId> removed) {
    const std::size_t n = g.num_nodes();
    std::vector<bool> gone(n, false);
    for (NodeId v : removed) {
        g.check_node(v);
        gone[v] = true;
    }
    std::vector<bool> seen(n, false);
    std::vector<NodeId> stack;
    std::size_t best = 0;
    for (NodeId s = 0; s < n; ++s) {
        if (gone[s] || seen[s]) continue;
        std::size_t size = 0;
        stack.assign(1, s);
        seen[s] = true;
        while (!stack.empty()) {
            const NodeId u = stack.back();
            stack.pop_back();
            ++size;
            for (NodeId w : g.neighbors(u))
                if (!gone[w] && !seen[w]) {
                    seen[w] = true;
                    stack.push_back(w);
                }
        }
        best = std::max(best, size);
    }
    return best;
}

} // namespace mmen
