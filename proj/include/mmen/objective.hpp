#pragma once

#include "mmen/graph.hpp"
#include "mmen/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <span>

namespace mmen {

/// Flattened covering sets: for every node v, the nodes u whose selection
/// covers v (out_neighborhood(g, v, d)), grouped by v.
struct CoverageIndex {
    std::size_t num_nodes = 0;
    std::size_t radius = 1;
    std::shared_ptr<const Index> members;
    std::shared_ptr<const Segments> by_node;
};

inline CoverageIndex coverage_index(const CascadeGraph &g, std::size_t d) {
    Index members, owner;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        for (NodeId u : out_neighborhood(g, v, d)) {
            members.push_back(u);
            owner.push_back(v);
        }
    CoverageIndex c;
    c.num_nodes = g.num_nodes();
    c.radius = d;
    c.members = std::make_shared<const Index>(std::move(members));
    c.by_node = std::make_shared<const Segments>(std::move(owner), g.num_nodes());
    return c;
}

inline constexpr double kMaxSeedProbability = 1.0 - 1e-12;

/// L = sum_v prod_{u in cover(v)} (1 - s_u) + lambda * sum_v s_v, with the
/// product evaluated as exp(sum log(1 - s_u)) and s clamped to 1 - 1e-12.
/// `scores` is N x 1.
inline Var coverage_loss(Tape &tape, Var scores, const CoverageIndex &cover, double lambda) {
    if (cover.num_nodes == 0) throw ArgumentError("coverage_loss: empty graph");
    if (!(lambda > 0.0)) throw ArgumentError("coverage_loss: lambda must be > 0");
    if (const Tensor &s = tape.value(scores); s.rows != cover.num_nodes || s.cols != 1)
        throw NumericError("coverage_loss: scores " + s.shape_str() + " do not match N=" +
                           std::to_string(cover.num_nodes));
    const Var log_miss = tape.log(tape.add_scalar(tape.scalar_mul(tape.clamp_max(scores, kMaxSeedProbability), -1.0), 1.0));
    const Var uncovered = tape.exp(tape.segment_sum(tape.gather_rows(log_miss, cover.members), cover.by_node));
    return tape.add(tape.sum(uncovered), tape.scalar_mul(tape.sum(scores), lambda));
}

inline Var coverage_loss(Tape &tape, Var scores, const CascadeGraph &g, double lambda, std::size_t d) {
    if (g.num_nodes() == 0) throw ArgumentError("coverage_loss: empty graph");
    return coverage_loss(tape, scores, coverage_index(g, d), lambda);
}

/// Node order by descending score, ties broken by the smaller NodeId.
inline std::vector<NodeId> rank_nodes(std::span<const double> scores) {
    for (double x : scores)
        if (std::isnan(x)) throw NumericError("cannot rank NaN scores");
    std::vector<NodeId> order(scores.size());
    std::iota(order.begin(), order.end(), NodeId{0});
    std::stable_sort(order.begin(), order.end(), [&](NodeId a, NodeId b) { return scores[a] > scores[b]; });
    return order;
}

/// Top ceil(fraction * N) nodes by score.
inline SeedSet select_seeds(std::span<const double> scores, double fraction) {
    const std::size_t k = seed_budget(scores.size(), fraction);
    auto order = rank_nodes(scores);
    order.resize(k);
    return SeedSet{std::move(order), fraction};
}

} // namespace mmen
