#pragma once

#include "mmen/featurize.hpp"
#include "mmen/graph.hpp"
#include "mmen/param_store.hpp"
#include "mmen/tape.hpp"

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mmen {

enum class Ablation { none, no_user, no_memory, no_fusion };

inline const char *ablation_name(Ablation a) {
    switch (a) {
    case Ablation::none: return "full";
    case Ablation::no_user: return "no-user";
    case Ablation::no_memory: return "no-memory";
    case Ablation::no_fusion: return "no-fusion";
    }
    return "?";
}

inline Ablation parse_ablation(std::string_view s) {
    if (s.empty() || s == "none" || s == "full") return Ablation::none;
    if (s == "no-user") return Ablation::no_user;
    if (s == "no-memory") return Ablation::no_memory;
    if (s == "no-fusion") return Ablation::no_fusion;
    throw ArgumentError("unknown ablation '" + std::string(s) + "' (valid: no-user, no-memory, no-fusion)");
}

struct ModelConfig {
    std::size_t hidden = 64;    ///< L; every hidden matrix is N x L
    std::size_t heads = 4;      ///< K; each head has L / K features
    std::size_t layers = 2;     ///< graph memory enhancement blocks per view
    std::size_t mem_groups = 4; ///< n memory matrices per block
    std::size_t mem_slots = 32; ///< b rows per memory matrix
    double leaky_slope = 0.2;
    double ln_eps = 1e-5;
    Ablation ablation = Ablation::none;

    bool use_user_view() const { return ablation != Ablation::no_user; }
    bool use_memory() const { return ablation != Ablation::no_memory; }
    bool adaptive_fusion() const { return ablation == Ablation::none || ablation == Ablation::no_memory; }

    std::size_t head_dim() const { return hidden / heads; }

    void validate() const {
        if (heads < 1 || hidden < 1 || layers < 1) throw ArgumentError("model: hidden, heads, layers must be >= 1");
        if (hidden % heads != 0) throw ArgumentError("model: hidden must be divisible by heads");
        if (use_memory() && (mem_groups < 1 || mem_slots < 1))
            throw ArgumentError("model: memory groups and slots must be >= 1");
    }
};

/// Parameter indices of one multi-head attention layer. Head k owns W^k
/// (F_in x F_head) and an attention matrix (F_head x 2) whose columns are the
/// center and neighbor halves of the attention vector.
struct GatLayerParams {
    std::vector<std::size_t> weight;
    std::vector<std::size_t> attention;
    double leaky_slope = 0.2;

    std::size_t heads() const { return weight.size(); }
};

/// n memory matrices (b x L) plus a kernel-1 convolution mixing the n reads.
/// The convolution has no bias: a constant shift of F_m cancels in the row
/// layer norm of memory_enhance.
struct MemoryBank {
    std::vector<std::size_t> slots;
    std::size_t conv_weight = 0; ///< 1 x n
};

struct ViewParams {
    View view = View::structure;
    std::size_t in_weight = 0, in_bias = 0;
    std::vector<GatLayerParams> gat;
    std::vector<MemoryBank> memory; ///< empty when memory is ablated
    std::size_t score_weight = 0, score_bias = 0;
};

/// All learnable tensors of the model plus the index layout over them.
struct MmenParams {
    ModelConfig config;
    ParamStore store;
    std::optional<ViewParams> user;
    ViewParams structure;
    std::optional<std::size_t> fusion_weight, fusion_bias;
};

namespace detail {

inline const char *view_prefix(View v) { return v == View::user ? "user" : "struct"; }

struct ParamInit {
    ParamStore &store;
    std::mt19937_64 &rng;
    bool random;

    std::size_t uniform(const std::string &name, std::size_t rows, std::size_t cols, std::size_t fan_in) {
        Tensor t(rows, cols);
        if (random) {
            const double bound = std::sqrt(1.0 / static_cast<double>(fan_in));
            for (double &x : t.data) x = (2.0 * rng::uniform01(rng) - 1.0) * bound;
        }
        return store.add(name, std::move(t));
    }
    std::size_t normal(const std::string &name, std::size_t rows, std::size_t cols, double sd) {
        Tensor t(rows, cols);
        if (random)
            for (double &x : t.data) x = sd * rng::normal(rng);
        return store.add(name, std::move(t));
    }
    std::size_t zeros(const std::string &name, std::size_t rows, std::size_t cols) {
        return store.add(name, Tensor(rows, cols, 0.0));
    }
};

inline ViewParams make_view(ParamInit &init, const ModelConfig &cfg, View view) {
    const std::string p = view_prefix(view);
    const std::size_t in_dim = view == View::user ? kUserDim : kStructDim;
    const std::size_t L = cfg.hidden, F = cfg.head_dim();
    ViewParams vp;
    vp.view = view;
    vp.in_weight = init.uniform(p + ".in.W", in_dim, L, in_dim);
    vp.in_bias = init.zeros(p + ".in.b", 1, L);
    for (std::size_t l = 0; l < cfg.layers; ++l) {
        GatLayerParams gat;
        gat.leaky_slope = cfg.leaky_slope;
        for (std::size_t k = 0; k < cfg.heads; ++k) {
            const std::string h = p + ".gat" + std::to_string(l) + ".head" + std::to_string(k);
            gat.weight.push_back(init.uniform(h + ".W", L, F, L));
            gat.attention.push_back(init.uniform(h + ".a", F, 2, 2 * F));
        }
        vp.gat.push_back(std::move(gat));
        if (cfg.use_memory()) {
            MemoryBank bank;
            const std::string m = p + ".mem" + std::to_string(l);
            for (std::size_t i = 0; i < cfg.mem_groups; ++i)
                bank.slots.push_back(init.normal(m + ".slots" + std::to_string(i), cfg.mem_slots, L, 0.1));
            bank.conv_weight = init.uniform(m + ".conv.W", 1, cfg.mem_groups, cfg.mem_groups);
            vp.memory.push_back(std::move(bank));
        }
    }
    vp.score_weight = init.uniform(p + ".score.W", L, 1, L);
    vp.score_bias = init.zeros(p + ".score.b", 1, 1);
    return vp;
}

inline void layout(MmenParams &mp, ParamInit &init) {
    if (mp.config.use_user_view()) mp.user = make_view(init, mp.config, View::user);
    mp.structure = make_view(init, mp.config, View::structure);
    if (mp.config.adaptive_fusion()) {
        mp.fusion_weight = init.uniform("fusion.W", 2 * mp.config.hidden, 2, 2 * mp.config.hidden);
        mp.fusion_bias = init.zeros("fusion.b", 1, 2);
    }
}

} // namespace detail

/// Fresh parameters: uniform(+-sqrt(1/fan_in)) weights, zero biases, memory
/// slots ~ N(0, 0.1^2).
inline MmenParams init_params(const ModelConfig &cfg, std::uint64_t seed) {
    cfg.validate();
    MmenParams mp;
    mp.config = cfg;
    auto rng = rng::stream(seed, 0x1417);
    detail::ParamInit init{mp.store, rng, true};
    detail::layout(mp, init);
    return mp;
}

/// Rebuilds the layout from a loaded store, inferring the architecture from
/// tensor names and checking every tensor's shape.
inline MmenParams params_from_store(ParamStore store) {
    auto shape_of = [&](const std::string &name) -> const Tensor & {
        if (!store.contains(name)) throw DataError("checkpoint lacks tensor '" + name + "'");
        return store.value(name);
    };
    ModelConfig cfg;
    const bool has_user = store.contains("user.in.W");
    const bool has_memory = store.contains("struct.mem0.conv.W");
    const bool has_fusion = store.contains("fusion.W");
    if (!has_user)
        cfg.ablation = Ablation::no_user;
    else if (!has_memory)
        cfg.ablation = Ablation::no_memory;
    else if (!has_fusion)
        cfg.ablation = Ablation::no_fusion;
    if (has_user && !has_memory && !has_fusion)
        throw DataError("checkpoint combines several ablations; only one is supported");

    cfg.hidden = shape_of("struct.in.W").cols;
    cfg.heads = 0;
    while (store.contains("struct.gat0.head" + std::to_string(cfg.heads) + ".W")) ++cfg.heads;
    cfg.layers = 0;
    while (store.contains("struct.gat" + std::to_string(cfg.layers) + ".head0.W")) ++cfg.layers;
    if (cfg.heads == 0 || cfg.layers == 0) throw DataError("checkpoint has no attention layers");
    if (has_memory) {
        cfg.mem_groups = shape_of("struct.mem0.conv.W").cols;
        cfg.mem_slots = shape_of("struct.mem0.slots0").rows;
    }
    cfg.validate();

    // Lay out an all-zero reference and compare shapes name by name.
    MmenParams ref;
    ref.config = cfg;
    std::mt19937_64 unused;
    detail::ParamInit init{ref.store, unused, false};
    detail::layout(ref, init);
    for (std::size_t i = 0; i < ref.store.size(); ++i) {
        const auto &name = ref.store.name(i);
        const Tensor &have = shape_of(name);
        const Tensor &want = ref.store.value(i);
        if (!have.same_shape(want))
            throw DataError("tensor '" + name + "' has shape " + have.shape_str() + ", expected " +
                            want.shape_str());
    }
    for (const auto &name : store.names())
        if (!ref.store.contains(name)) throw DataError("unexpected tensor '" + name + "' in checkpoint");
    // Copy values into the reference layout so indices line up.
    for (std::size_t i = 0; i < ref.store.size(); ++i) ref.store.value(i) = store.value(ref.store.name(i));
    return ref;
}

/// Attention neighborhoods with self-loops, stored per edge and grouped by the
/// receiving (center) node. Node i attends over its in-neighbors and itself;
/// with `undirected`, over every neighbor.
struct GraphTopology {
    std::size_t num_nodes = 0;
    std::shared_ptr<const Index> center;   ///< receiving node of each attention edge
    std::shared_ptr<const Index> neighbor; ///< sending node of each attention edge
    std::shared_ptr<const Segments> by_center;
};

inline GraphTopology attention_topology(const CascadeGraph &g, bool undirected = false) {
    Index center, neighbor;
    for (NodeId i = 0; i < g.num_nodes(); ++i) {
        center.push_back(i);
        neighbor.push_back(i);
        for (NodeId j : undirected ? g.neighbors(i) : g.in_neighbors(i)) {
            center.push_back(i);
            neighbor.push_back(j);
        }
    }
    GraphTopology t;
    t.num_nodes = g.num_nodes();
    t.by_center = std::make_shared<const Segments>(center, g.num_nodes());
    t.center = std::make_shared<const Index>(std::move(center));
    t.neighbor = std::make_shared<const Index>(std::move(neighbor));
    return t;
}

inline Tensor to_tensor(const FeatureMatrix &m) { return Tensor(m.rows, m.cols, m.values); }

/// Everything the forward pass needs from one graph.
struct ModelInputs {
    Tensor user;      ///< N x 9, normalized
    Tensor structure; ///< N x 8, normalized
    GraphTopology topology;
};

inline ModelInputs make_inputs(const CascadeGraph &g, const WalkConfig &walk) {
    return ModelInputs{to_tensor(user_features(g)), to_tensor(random_walk_features(g, walk)),
                       attention_topology(g, walk.undirected)};
}

/// Multi-head graph attention. Per head: e_ij = leaky_relu(a_c . Wh_i + a_n . Wh_j),
/// alpha = softmax of e over i's neighborhood, h'_i = elu(sum_j alpha_ij W h_j).
/// Head outputs are concatenated.
inline Var gat_layer(Tape &tape, Var h, const GraphTopology &topo, const ParamStore &ps,
                     const GatLayerParams &p) {
    const std::size_t rows = tape.value(h).rows, in_dim = tape.value(h).cols;
    if (rows != topo.num_nodes)
        throw NumericError("gat_layer: feature rows " + std::to_string(rows) + " != N " +
                           std::to_string(topo.num_nodes));
    std::vector<Var> heads;
    heads.reserve(p.heads());
    for (std::size_t k = 0; k < p.heads(); ++k) {
        const Var w = tape.param(ps, p.weight[k]);
        const Var a = tape.param(ps, p.attention[k]);
        if (tape.value(w).rows != in_dim)
            throw NumericError("gat_layer: input dim " + std::to_string(in_dim) + " does not match '" +
                               ps.name(p.weight[k]) + "' " + tape.value(w).shape_str());
        const Var z = tape.matmul(h, w);
        const Var proj = tape.matmul(z, a);
        const Var score_c = tape.gather_rows(tape.slice_cols(proj, 0, 1), topo.center);
        const Var score_n = tape.gather_rows(tape.slice_cols(proj, 1, 1), topo.neighbor);
        const Var logits = tape.leaky_relu(tape.add(score_c, score_n), p.leaky_slope);
        const Var alpha = tape.segment_softmax(logits, topo.by_center);
        const Var messages = tape.mul(tape.gather_rows(z, topo.neighbor), alpha);
        heads.push_back(tape.elu(tape.segment_sum(messages, topo.by_center)));
    }
    return heads.size() == 1 ? heads.front() : tape.concat(heads);
}

/// Per node h and group i: p = softmax(m_i h), F_i = p^T m_i; the groups are
/// mixed by the kernel-1 convolution F_m = sum_i c_i F_i.
inline Var memory_read(Tape &tape, Var h, const ParamStore &ps, const MemoryBank &bank) {
    const std::size_t L = tape.value(h).cols;
    const Var conv_w = tape.param(ps, bank.conv_weight);
    std::optional<Var> mixed;
    for (std::size_t i = 0; i < bank.slots.size(); ++i) {
        const Var m = tape.param(ps, bank.slots[i]);
        if (tape.value(m).cols != L)
            throw NumericError("memory_read: feature dim " + std::to_string(L) + " does not match '" +
                               ps.name(bank.slots[i]) + "' " + tape.value(m).shape_str());
        const Var similarity = tape.row_softmax(tape.matmul(h, tape.transpose(m)));
        const Var read = tape.mul(tape.matmul(similarity, m), tape.slice_cols(conv_w, i, 1));
        mixed = mixed ? tape.add(*mixed, read) : read;
    }
    return *mixed;
}

/// F_a = relu(layer_norm(H + F_m)), row-wise.
inline Var memory_enhance(Tape &tape, Var h, Var memory, double eps = 1e-5) {
    return tape.relu(tape.layer_norm(tape.add(h, memory), eps));
}

/// Independent per-node probability s_v = sigmoid(F_a[v] . W_s + b_s), N x 1.
inline Var score_head(Tape &tape, Var features, Var weight, Var bias) {
    return tape.sigmoid(tape.add(tape.matmul(features, weight), bias));
}

/// (w_user, w_stru) = softmax(W_m (mean(h_u) ++ mean(h_s)) + b_m), as a 1 x 2 row.
inline Var fusion_weights(Tape &tape, Var h_user, Var h_struct, Var weight, Var bias) {
    const Var pooled = tape.concat({tape.mean_rows(h_user), tape.mean_rows(h_struct)});
    return tape.row_softmax(tape.add(tape.matmul(pooled, weight), bias));
}

/// S = w_user * S1 + w_stru * S2.
inline Var fuse_scores(Tape &tape, Var s_user, Var s_struct, Var w) {
    return tape.add(tape.mul(s_user, tape.slice_cols(w, 0, 1)), tape.mul(s_struct, tape.slice_cols(w, 1, 1)));
}

struct ViewOutput {
    Var hidden; ///< final N x L representation
    Var scores; ///< N x 1
};

inline ViewOutput view_forward(Tape &tape, const Tensor &features, const GraphTopology &topo,
                               const MmenParams &mp, const ViewParams &vp) {
    const ParamStore &ps = mp.store;
    const Var x = tape.constant(features);
    if (features.cols != ps.value(vp.in_weight).rows)
        throw NumericError("feature dim " + std::to_string(features.cols) + " does not match '" +
                           ps.name(vp.in_weight) + "' " + ps.value(vp.in_weight).shape_str());
    Var h = tape.add(tape.matmul(x, tape.param(ps, vp.in_weight)), tape.param(ps, vp.in_bias));
    for (std::size_t l = 0; l < vp.gat.size(); ++l) {
        h = gat_layer(tape, h, topo, ps, vp.gat[l]);
        if (!vp.memory.empty())
            h = memory_enhance(tape, h, memory_read(tape, h, ps, vp.memory[l]), mp.config.ln_eps);
    }
    const Var s = score_head(tape, h, tape.param(ps, vp.score_weight), tape.param(ps, vp.score_bias));
    return {h, s};
}

struct ForwardResult {
    Var scores;                  ///< fused S, N x 1
    std::optional<Var> s_user;   ///< absent when the user view is ablated
    Var s_struct;
    Var weights;                 ///< 1 x 2 (w_user, w_stru)
};

/// Both views through [attention -> memory read -> enhancement] x layers, a
/// score head per view, then adaptive fusion. Ablations: no-user returns the
/// structural scores with weights (0, 1); no-fusion uses fixed (0.5, 0.5);
/// no-memory passes the attention output straight through.
inline ForwardResult mmen_forward(Tape &tape, const ModelInputs &in, const MmenParams &mp) {
    if (in.structure.rows != in.topology.num_nodes || (mp.user && in.user.rows != in.topology.num_nodes))
        throw NumericError("mmen_forward: feature rows do not match the graph");
    const ViewOutput st = view_forward(tape, in.structure, in.topology, mp, mp.structure);
    if (!mp.user) {
        const Var w = tape.constant(Tensor(1, 2, std::vector<double>{0.0, 1.0}));
        return {st.scores, std::nullopt, st.scores, w};
    }
    const ViewOutput us = view_forward(tape, in.user, in.topology, mp, *mp.user);
    const Var w = mp.fusion_weight
                      ? fusion_weights(tape, us.hidden, st.hidden, tape.param(mp.store, *mp.fusion_weight),
                                       tape.param(mp.store, *mp.fusion_bias))
                      : tape.constant(Tensor(1, 2, std::vector<double>{0.5, 0.5}));
    return {fuse_scores(tape, us.scores, st.scores, w), us.scores, st.scores, w};
}

} // namespace mmen
