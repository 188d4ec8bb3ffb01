#pragma once

#include "mmen/graph.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

namespace mmen {

enum class View { user, structure };

inline const char *view_name(View v) { return v == View::user ? "user" : "structure"; }

inline constexpr std::size_t kUserDim = 9;
inline constexpr std::size_t kStructDim = 8;

/// Row-major per-node features for one view.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    View view = View::user;

    FeatureMatrix() = default;
    FeatureMatrix(std::size_t r, std::size_t c, View v) : rows(r), cols(c), values(r * c, 0.0), view(v) {}

    double &at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

struct WalkConfig {
    std::size_t walks_per_node = 10;
    std::size_t walk_len = 4;
    std::uint64_t rng_seed = 0;
    bool undirected = false; ///< walk both edge directions

    void validate() const {
        if (walks_per_node < 1) throw ArgumentError("walks_per_node must be >= 1");
        if (walk_len < 1) throw ArgumentError("walk_len must be >= 1");
    }
};

/// Number of Unicode code points in a UTF-8 string.
inline std::size_t utf8_length(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++n;
    return n;
}

namespace detail {

inline std::array<double, kUserDim> user_row(const UserRecord &u, std::optional<std::size_t> depth) {
    auto count = [](const std::optional<std::uint64_t> &x) { return x ? static_cast<double>(*x) : 0.0; };
    auto flag = [](const std::optional<bool> &x) { return x && *x ? 1.0 : 0.0; };
    return {
        u.name ? static_cast<double>(utf8_length(*u.name)) : 0.0,
        u.description ? static_cast<double>(utf8_length(*u.description)) : 0.0,
        count(u.followers_count),
        count(u.friends_count),
        count(u.statuses_count),
        flag(u.verified),
        flag(u.geo_enabled),
        u.retweet_delay_s.value_or(0.0),
        depth ? static_cast<double>(*depth) : 0.0,
    };
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

/// Raw user-attribute vector of v: name length, description length, followers,
/// friends, statuses, verified, geo_enabled, retweet delay, hop distance from
/// the source (0 if unreachable). Absent fields read as 0.
inline std::array<double, kUserDim> user_attribute_vector(const CascadeGraph &g, NodeId v) {
    g.check_node(v);
    return detail::user_row(g.user(v), shortest_path_len(g, g.source(), v));
}

inline FeatureMatrix user_attribute_matrix(const CascadeGraph &g) {
    FeatureMatrix m(g.num_nodes(), kUserDim, View::user);
    const auto depth = bfs_distances(g, g.source());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto row = detail::user_row(g.user(v), depth[v]);
        std::copy(row.begin(), row.end(), m.values.begin() + static_cast<std::ptrdiff_t>(v * kUserDim));
    }
    return m;
}

/// Per-column z-score with population variance; constant columns become 0.
inline void zscore_columns(FeatureMatrix &m) {
    if (m.rows == 0) return;
    const double n = static_cast<double>(m.rows);
    std::vector<double> col(m.rows);
    for (std::size_t c = 0; c < m.cols; ++c) {
        // Sorted summation makes the moments independent of row order.
        for (std::size_t r = 0; r < m.rows; ++r) col[r] = m.at(r, c);
        std::sort(col.begin(), col.end());
        double mean = 0.0;
        for (double x : col) mean += x;
        mean /= n;
        for (double &x : col) x = (x - mean) * (x - mean);
        std::sort(col.begin(), col.end());
        double var = 0.0;
        for (double x : col) var += x;
        const double sd = std::sqrt(var / n);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            for (std::size_t r = 0; r < m.rows; ++r) m.at(r, c) = 0.0;
            continue;
        }
        for (std::size_t r = 0; r < m.rows; ++r) m.at(r, c) = (m.at(r, c) - mean) / sd;
    }
}

/// Count-like user columns (name/description length, followers, friends,
/// statuses, delay) go through log1p, then every column is z-scored per graph.
inline FeatureMatrix normalize_features(FeatureMatrix m) {
    for (double x : m.values)
        if (!std::isfinite(x)) throw DataError("normalize_features: non-finite input");
    if (m.view == View::user) {
        static constexpr std::size_t kCountCols[] = {0, 1, 2, 3, 4, 7};
        for (std::size_t r = 0; r < m.rows; ++r)
            for (std::size_t c : kCountCols) m.at(r, c) = std::log1p(std::max(0.0, m.at(r, c)));
    }
    zscore_columns(m);
    return m;
}

inline FeatureMatrix user_features(const CascadeGraph &g) {
    return normalize_features(user_attribute_matrix(g));
}

/// Raw random-walk statistics per node (before z-scoring). Each walk takes
/// `walk_len` steps; a walker with no outgoing move jumps back to its start.
/// Columns: out-degree/(N-1), in-degree/(N-1), mean and max degree of visited
/// nodes, fraction of steps that land on the start node, distinct nodes seen
/// (start included) over steps+1, fraction of walks that never restarted, and
/// mean hop depth per step.
///
/// The stream for a node is keyed by its label and neighbors are drawn in label
/// order, so relabeling the dense ids permutes the rows exactly.
inline FeatureMatrix random_walk_stats(const CascadeGraph &g, const WalkConfig &cfg) {
    cfg.validate();
    const std::size_t n = g.num_nodes();
    FeatureMatrix m(n, kStructDim, View::structure);

    // Label rank gives an id-independent neighbor order.
    std::vector<NodeId> by_label(n);
    std::iota(by_label.begin(), by_label.end(), NodeId{0});
    std::sort(by_label.begin(), by_label.end(),
              [&](NodeId a, NodeId b) { return g.label(a) < g.label(b); });
    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) rank[by_label[i]] = i;

    std::vector<std::vector<NodeId>> next(n);
    for (NodeId v = 0; v < n; ++v) {
        const auto nb = cfg.undirected ? g.neighbors(v) : g.out_neighbors(v);
        next[v].assign(nb.begin(), nb.end());
        std::sort(next[v].begin(), next[v].end(), [&](NodeId a, NodeId b) { return rank[a] < rank[b]; });
    }
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    const double steps = static_cast<double>(cfg.walks_per_node * cfg.walk_len);

    std::vector<std::uint32_t> stamp(n, 0);
    std::uint32_t epoch = 0;
    for (NodeId v = 0; v < n; ++v) {
        auto rng = rng::stream(cfg.rng_seed, detail::fnv1a(g.label(v)));
        ++epoch;
        stamp[v] = epoch;
        std::size_t distinct = 1, returns = 0, full_walks = 0, max_deg = 0;
        double deg_sum = 0.0, depth_sum = 0.0;
        for (std::size_t w = 0; w < cfg.walks_per_node; ++w) {
            NodeId pos = v;
            std::size_t depth = 0;
            bool restarted = false;
            for (std::size_t s = 0; s < cfg.walk_len; ++s) {
                const auto &nb = next[pos];
                if (nb.empty()) {
                    pos = v;
                    depth = 0;
                    restarted = true;
                } else {
                    pos = nb[rng::below(rng, nb.size())];
                    ++depth;
                }
                if (pos == v) ++returns;
                if (stamp[pos] != epoch) {
                    stamp[pos] = epoch;
                    ++distinct;
                }
                const std::size_t deg = next[pos].size();
                deg_sum += static_cast<double>(deg);
                max_deg = std::max(max_deg, deg);
                depth_sum += static_cast<double>(depth);
            }
            if (!restarted) ++full_walks;
        }
        m.at(v, 0) = static_cast<double>(g.out_degree(v)) / denom;
        m.at(v, 1) = static_cast<double>(g.in_degree(v)) / denom;
        m.at(v, 2) = deg_sum / steps;
        m.at(v, 3) = static_cast<double>(max_deg);
        m.at(v, 4) = static_cast<double>(returns) / steps;
        m.at(v, 5) = static_cast<double>(distinct) / (steps + 1.0);
        m.at(v, 6) = static_cast<double>(full_walks) / static_cast<double>(cfg.walks_per_node);
        m.at(v, 7) = depth_sum / steps;
    }
    return m;
}

inline FeatureMatrix random_walk_features(const CascadeGraph &g, const WalkConfig &cfg) {
    FeatureMatrix m = random_walk_stats(g, cfg);
    zscore_columns(m);
    return m;
}

/// CSV dump: `node,view,f0..f8`; structure rows leave the last cell empty.
inline void write_features_csv(std::ostream &out, const CascadeGraph &g,
                               std::span<const FeatureMatrix *const> views) {
    std::size_t width = 0;
    for (const auto *m : views) width = std::max(width, m->cols);
    out << "node,view";
    for (std::size_t c = 0; c < width; ++c) out << ",f" << c;
    out << '\n';
    char buf[64];
    for (const auto *m : views)
        for (std::size_t r = 0; r < m->rows; ++r) {
            out << g.label(static_cast<NodeId>(r)) << ',' << view_name(m->view);
            for (std::size_t c = 0; c < width; ++c) {
                out << ',';
                if (c < m->cols) {
                    std::snprintf(buf, sizeof buf, "%.10g", m->at(r, c));
                    out << buf;
                }
            }
            out << '\n';
        }
}

} // namespace mmen
