#pragma once

#include "mmen/adam.hpp"
#include "mmen/model.hpp"
#include "mmen/objective.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace mmen {

struct TrainConfig {
    std::size_t batch_size = 2;
    std::size_t epochs = 50;
    double lr = 5e-4;
    double lambda = 1.0;
    std::size_t d_cover = 1;
    std::size_t patience = 10;
    double seed_fraction = 0.05;
    double val_fraction = 0.2; ///< held out from training graphs when no validation set is given
    std::uint64_t rng_seed = 0;
    unsigned jobs = 1;

    void validate() const {
        if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
        if (!(lr > 0.0)) throw ArgumentError("lr must be > 0");
        if (!(lambda > 0.0)) throw ArgumentError("lambda must be > 0");
        if (d_cover < 1) throw ArgumentError("d_cover must be >= 1");
        if (!(seed_fraction > 0.0 && seed_fraction <= 1.0)) throw ArgumentError("seed_fraction must lie in (0, 1]");
        if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ArgumentError("val_fraction must lie in (0, 1)");
    }
};

/// A graph with its features, attention topology and covering sets computed once.
struct PreparedGraph {
    std::string name;
    CascadeGraph graph;
    ModelInputs inputs;
    CoverageIndex cover;
};

inline PreparedGraph prepare_graph(std::string name, CascadeGraph g, const WalkConfig &walk, std::size_t d_cover) {
    PreparedGraph p;
    p.name = std::move(name);
    p.inputs = make_inputs(g, walk);
    p.cover = coverage_index(g, d_cover);
    p.graph = std::move(g);
    return p;
}

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0; ///< mean per-graph loss over the epoch's batches
    double val_loss = 0.0;   ///< mean per-graph loss on validation graphs after the epoch
};

struct TrainResult {
    MmenParams params; ///< best-validation snapshot
    std::vector<EpochRecord> history;
    double initial_train_loss = 0.0;
    double initial_val_loss = 0.0;
    std::size_t best_epoch = 0;
    double best_val_loss = std::numeric_limits<double>::infinity();
};

struct GraphLoss {
    double loss = 0.0;
    Gradients grads; ///< empty unless requested
};

/// Coverage loss of the fused scores on one graph, optionally with gradients.
inline GraphLoss graph_loss(const PreparedGraph &pg, const MmenParams &mp, double lambda, bool with_grad) {
    Tape tape;
    const ForwardResult fwd = mmen_forward(tape, pg.inputs, mp);
    const Var loss = coverage_loss(tape, fwd.scores, pg.cover, lambda);
    GraphLoss out;
    out.loss = tape.value(loss).item();
    // relu maps NaN to 0, so a finite loss does not rule out NaN upstream.
    const auto where = tape.first_nonfinite();
    if (where || !std::isfinite(out.loss))
        throw NumericError("non-finite value on graph '" + pg.name + "'; first non-finite op: " +
                           where.value_or("none"));
    if (with_grad) out.grads = tape.backward(loss, mp.store);
    return out;
}

inline double mean_loss(std::span<const PreparedGraph *const> graphs, const MmenParams &mp, double lambda,
                        unsigned jobs) {
    std::vector<double> losses(graphs.size());
    parallel_for(graphs.size(), jobs, [&](std::size_t i) { losses[i] = graph_loss(*graphs[i], mp, lambda, false).loss; });
    double total = 0.0;
    for (double l : losses) total += l;
    return graphs.empty() ? 0.0 : total / static_cast<double>(graphs.size());
}

/// Adam on the summed per-batch coverage loss, with early stopping on the
/// mean validation loss. Training stops once `patience` epochs have passed
/// without improvement; the best-validation parameters are returned.
inline TrainResult train(std::span<const PreparedGraph> train_graphs, std::span<const PreparedGraph> val_graphs,
                         const ModelConfig &model_cfg, const TrainConfig &cfg, std::ostream *log = nullptr) {
    cfg.validate();
    if (train_graphs.empty()) throw ArgumentError("train: no training graphs");

    std::vector<const PreparedGraph *> tr, va;
    for (const auto &g : train_graphs) tr.push_back(&g);
    for (const auto &g : val_graphs) va.push_back(&g);
    if (va.empty()) {
        if (tr.size() < 2) throw ArgumentError("train: need a validation graph or at least two training graphs");
        auto held = static_cast<std::size_t>(std::ceil(cfg.val_fraction * static_cast<double>(tr.size())));
        held = std::clamp<std::size_t>(held, 1, tr.size() - 1);
        va.assign(tr.end() - static_cast<std::ptrdiff_t>(held), tr.end());
        tr.resize(tr.size() - held);
    }

    TrainResult result;
    MmenParams params = init_params(model_cfg, cfg.rng_seed);
    AdamState adam(params.store);
    result.initial_train_loss = mean_loss(tr, params, cfg.lambda, cfg.jobs);
    result.initial_val_loss = mean_loss(va, params, cfg.lambda, cfg.jobs);
    result.params = params;
    result.best_val_loss = result.initial_val_loss;

    auto shuffle_rng = rng::stream(cfg.rng_seed, 0x5b0f);
    std::vector<std::size_t> order(tr.size());
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng::shuffle(order, shuffle_rng);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - start);
            std::vector<GraphLoss> parts(count);
            parallel_for(count, cfg.jobs, [&](std::size_t b) {
                parts[b] = graph_loss(*tr[order[start + b]], params, cfg.lambda, true);
            });
            Gradients total = params.store.zero_gradients();
            for (const auto &p : parts) {
                accumulate(total, p.grads);
                epoch_loss += p.loss;
            }
            adam_step(params.store, total, adam, cfg.lr);
        }
        EpochRecord rec{epoch, epoch_loss / static_cast<double>(tr.size()), mean_loss(va, params, cfg.lambda, cfg.jobs)};
        result.history.push_back(rec);
        if (log)
            *log << "epoch " << rec.epoch << " train " << rec.train_loss << " val " << rec.val_loss << '\n';
        if (rec.val_loss < result.best_val_loss) {
            result.best_val_loss = rec.val_loss;
            result.best_epoch = epoch;
            result.params = params;
        }
        if (epoch - result.best_epoch >= cfg.patience) break;
    }
    return result;
}

inline void write_history_csv(std::ostream &out, const std::vector<EpochRecord> &history) {
    out << "epoch,train_loss,val_loss\n";
    char buf[128];
    for (const auto &r : history) {
        std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", r.epoch, r.train_loss, r.val_loss);
        out << buf;
    }
}

} // namespace mmen
