#pragma once

// Library side of the `mmen` subcommands. The CLI parses flags into these
// option structs; tests call the functions directly.

#include "mmen/cascade_io.hpp"
#include "mmen/report.hpp"
#include "mmen/synth.hpp"
#include "mmen/train.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mmen {

namespace fs = std::filesystem;

inline constexpr const char *kManifestFile = "manifest.json";
inline constexpr const char *kCheckpointFile = "best.ckpt";
inline constexpr const char *kHistoryFile = "history.csv";

struct Manifest {
    std::vector<std::string> graphs;
    std::vector<std::string> train, val, test;
};

inline void write_manifest(const fs::path &dir, const Manifest &m) {
    nlohmann::ordered_json j;
    j["graphs"] = m.graphs;
    j["train"] = m.train;
    j["val"] = m.val;
    j["test"] = m.test;
    std::ofstream out(dir / kManifestFile, std::ios::binary);
    if (!out) throw DataError("cannot write " + (dir / kManifestFile).string());
    out << j.dump(2) << '\n';
}

inline Manifest read_manifest(const fs::path &dir) {
    const fs::path p = dir / kManifestFile;
    std::ifstream in(p);
    if (!in) throw DataError("cannot open " + p.string());
    try {
        const auto j = nlohmann::json::parse(in);
        Manifest m;
        m.graphs = j.at("graphs").get<std::vector<std::string>>();
        m.train = j.value("train", std::vector<std::string>{});
        m.val = j.value("val", std::vector<std::string>{});
        m.test = j.value("test", std::vector<std::string>{});
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw DataError(p.string() + ": " + e.what());
    }
}

/// Split sizes for n graphs: 15% validation and 15% test (each at least one
/// when n >= 3), the rest training.
inline std::array<std::size_t, 3> split_sizes(std::size_t n) {
    std::size_t val = n * 15 / 100, test = n * 15 / 100;
    if (n >= 3) {
        val = std::max<std::size_t>(val, 1);
        test = std::max<std::size_t>(test, 1);
    }
    return {n - val - test, val, test};
}

// ---------------------------------------------------------------- gen

struct GenOptions {
    fs::path out;
    std::size_t n_graphs = 60;
    std::size_t min_nodes = 200;
    std::size_t max_nodes = 500;
    double extra_edge_frac = 0.1;
    double attr_noise = 0.5;
    std::uint64_t seed = 0;
};

inline Manifest cmd_gen(const GenOptions &opt) {
    if (opt.n_graphs < 1) throw ArgumentError("gen: need at least one graph");
    if (opt.min_nodes < 10 || opt.max_nodes < opt.min_nodes)
        throw ArgumentError("gen: node range must satisfy 10 <= min <= max");
    std::error_code ec;
    fs::create_directories(opt.out, ec);
    if (ec) throw DataError("cannot create " + opt.out.string() + ": " + ec.message());

    Manifest m;
    auto size_rng = rng::stream(opt.seed, 0x51e);
    for (std::size_t i = 0; i < opt.n_graphs; ++i) {
        const std::size_t n = opt.min_nodes + rng::below(size_rng, opt.max_nodes - opt.min_nodes + 1);
        char name[32];
        std::snprintf(name, sizeof name, "g%03zu", i);
        save_cascade(synth_cascade(n, opt.extra_edge_frac, opt.attr_noise, rng::derive(opt.seed, i)), opt.out / name);
        m.graphs.emplace_back(name);
    }
    const auto [n_train, n_val, n_test] = split_sizes(m.graphs.size());
    m.train.assign(m.graphs.begin(), m.graphs.begin() + static_cast<std::ptrdiff_t>(n_train));
    m.val.assign(m.graphs.begin() + static_cast<std::ptrdiff_t>(n_train),
                 m.graphs.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    m.test.assign(m.graphs.end() - static_cast<std::ptrdiff_t>(n_test), m.graphs.end());
    write_manifest(opt.out, m);
    return m;
}

// ---------------------------------------------------------------- model files

/// A trained model plus the feature settings it was trained with.
struct SavedModel {
    MmenParams params;
    WalkConfig walk;
    std::size_t d_cover = 1;
};

// Feature settings ride along in the checkpoint as a "meta.features" tensor:
// walks_per_node, walk_len, seed high/low 32 bits, undirected, d_cover.
inline void save_model(const fs::path &path, const SavedModel &m) {
    ParamStore out = m.params.store;
    const double seed_hi = static_cast<double>(m.walk.rng_seed >> 32);
    const double seed_lo = static_cast<double>(m.walk.rng_seed & 0xffffffffULL);
    out.add("meta.features", Tensor(1, 6, std::vector<double>{static_cast<double>(m.walk.walks_per_node),
                                                             static_cast<double>(m.walk.walk_len), seed_hi, seed_lo,
                                                             m.walk.undirected ? 1.0 : 0.0,
                                                             static_cast<double>(m.d_cover)}));
    save_checkpoint(out, path);
}

inline SavedModel load_model(const fs::path &path) {
    ParamStore raw = load_checkpoint(path);
    SavedModel m;
    ParamStore params;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw.name(i) == "meta.features") {
            const Tensor &t = raw.value(i);
            if (t.numel() != 6) throw DataError(path.string() + ": malformed meta.features");
            m.walk.walks_per_node = static_cast<std::size_t>(t.data[0]);
            m.walk.walk_len = static_cast<std::size_t>(t.data[1]);
            m.walk.rng_seed = (static_cast<std::uint64_t>(t.data[2]) << 32) | static_cast<std::uint64_t>(t.data[3]);
            m.walk.undirected = t.data[4] != 0.0;
            m.d_cover = static_cast<std::size_t>(t.data[5]);
            continue;
        }
        params.add(raw.name(i), raw.value(i));
    }
    try {
        m.params = params_from_store(std::move(params));
    } catch (const DataError &e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return m;
}

// ---------------------------------------------------------------- train

struct TrainOptions {
    fs::path data;
    fs::path out;
    ModelConfig model;
    TrainConfig train;
    WalkConfig walk;
    bool all_variants = false; ///< train full + three ablations into out/<variant>/
    std::ostream *log = nullptr;
};

struct TrainSummary {
    Ablation variant = Ablation::none;
    fs::path checkpoint;
    TrainResult result;
};

inline std::vector<PreparedGraph> load_split(const fs::path &data, const std::vector<std::string> &names,
                                             const WalkConfig &walk, std::size_t d_cover) {
    std::vector<PreparedGraph> out;
    out.reserve(names.size());
    for (const auto &n : names) out.push_back(prepare_graph(n, load_cascade(data / n), walk, d_cover));
    return out;
}

inline std::vector<TrainSummary> cmd_train(const TrainOptions &opt) {
    const Manifest m = read_manifest(opt.data);
    if (m.train.empty()) throw DataError("manifest lists no training graphs");
    const auto train_set = load_split(opt.data, m.train, opt.walk, opt.train.d_cover);
    const auto val_set = load_split(opt.data, m.val, opt.walk, opt.train.d_cover);

    std::vector<Ablation> variants{opt.model.ablation};
    if (opt.all_variants) variants = {Ablation::none, Ablation::no_user, Ablation::no_memory, Ablation::no_fusion};

    std::vector<TrainSummary> out;
    for (Ablation a : variants) {
        ModelConfig cfg = opt.model;
        cfg.ablation = a;
        const fs::path dir = opt.all_variants ? opt.out / ablation_name(a) : opt.out;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
        if (opt.log) *opt.log << "training variant " << ablation_name(a) << '\n';

        TrainSummary s{a, dir / kCheckpointFile, train(train_set, val_set, cfg, opt.train, opt.log)};
        save_model(s.checkpoint, SavedModel{s.result.params, opt.walk, opt.train.d_cover});
        std::ofstream hist(dir / kHistoryFile, std::ios::binary);
        if (!hist) throw DataError("cannot write " + (dir / kHistoryFile).string());
        write_history_csv(hist, s.result.history);
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------- score

struct GraphScores {
    std::vector<double> fused;
    std::vector<double> user; ///< empty when the user view is ablated
    std::vector<double> structure;
    double w_user = 0.0;
    double w_stru = 0.0;
    SeedSet seeds;
};

inline GraphScores score_graph(const SavedModel &model, const CascadeGraph &g, double fraction) {
    const ModelInputs in = make_inputs(g, model.walk);
    Tape tape;
    const ForwardResult fwd = mmen_forward(tape, in, model.params);
    if (const auto bad = tape.first_nonfinite()) throw NumericError("non-finite value while scoring at " + *bad);
    GraphScores s;
    s.fused = tape.value(fwd.scores).data;
    if (fwd.s_user) s.user = tape.value(*fwd.s_user).data;
    s.structure = tape.value(fwd.s_struct).data;
    s.w_user = tape.value(fwd.weights).data[0];
    s.w_stru = tape.value(fwd.weights).data[1];
    s.seeds = select_seeds(s.fused, fraction);
    return s;
}

inline void write_scores_csv(std::ostream &out, const CascadeGraph &g, const GraphScores &s) {
    std::vector<bool> seed(g.num_nodes(), false);
    for (NodeId v : s.seeds.members) seed[v] = true;
    out << "node,score,s_user,s_struct,w_user,w_stru,is_seed\n";
    char buf[64];
    auto num = [&](double x) {
        std::snprintf(buf, sizeof buf, "%.12g", x);
        return std::string(buf);
    };
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        out << g.label(v) << ',' << num(s.fused[v]) << ',' << (s.user.empty() ? "" : num(s.user[v])) << ','
            << num(s.structure[v]) << ',' << num(s.w_user) << ',' << num(s.w_stru) << ',' << (seed[v] ? 1 : 0)
            << '\n';
    }
}

struct ScoreOptions {
    fs::path checkpoint;
    fs::path graph;
    fs::path out = "scores.csv";
    double fraction = 0.05;
    std::optional<fs::path> dump_features{};
};

inline GraphScores cmd_score(const ScoreOptions &opt) {
    const SavedModel model = load_model(opt.checkpoint);
    const CascadeGraph g = load_cascade(opt.graph);
    GraphScores s = score_graph(model, g, opt.fraction);
    std::ofstream out(opt.out, std::ios::binary);
    if (!out) throw DataError("cannot write " + opt.out.string());
    write_scores_csv(out, g, s);
    if (opt.dump_features) {
        std::ofstream f(*opt.dump_features, std::ios::binary);
        if (!f) throw DataError("cannot write " + opt.dump_features->string());
        const FeatureMatrix u = user_features(g), st = random_walk_features(g, model.walk);
        const FeatureMatrix *views[] = {&u, &st};
        write_features_csv(f, g, views);
    }
    return s;
}

// ---------------------------------------------------------------- compare

struct CompareOptions {
    fs::path data;
    fs::path out;
    std::optional<fs::path> checkpoint;     ///< evaluated as "mmen"
    std::optional<fs::path> checkpoint_dir; ///< <dir>/{full,no-user,no-memory,no-fusion}/best.ckpt
    std::vector<std::string> methods;       ///< empty: every available method
    SirConfig sir;
    double fraction = 0.05;
    std::size_t d_cover = 1;
    std::string split = "test";
    unsigned jobs = 1;
};

inline std::string mmen_method_name(Ablation a) {
    return a == Ablation::none ? "mmen" : std::string("mmen-") + ablation_name(a);
}

inline Selector mmen_selector(std::shared_ptr<const SavedModel> model) {
    return [model](const CascadeGraph &g, std::size_t, double f) { return score_graph(*model, g, f).seeds; };
}

inline EvalReport cmd_compare(const CompareOptions &opt) {
    const Manifest m = read_manifest(opt.data);
    const std::vector<std::string> *names = opt.split == "test"    ? &m.test
                                            : opt.split == "val"   ? &m.val
                                            : opt.split == "train" ? &m.train
                                            : opt.split == "all"   ? &m.graphs
                                                                   : nullptr;
    if (!names) throw ArgumentError("unknown split '" + opt.split + "' (valid: train, val, test, all)");
    if (names->empty()) throw DataError("split '" + opt.split + "' is empty");

    std::map<std::string, Selector> extra;
    std::vector<std::string> model_methods;
    if (opt.checkpoint) {
        extra["mmen"] = mmen_selector(std::make_shared<const SavedModel>(load_model(*opt.checkpoint)));
        model_methods.push_back("mmen");
    }
    if (opt.checkpoint_dir) {
        for (Ablation a : {Ablation::none, Ablation::no_user, Ablation::no_memory, Ablation::no_fusion}) {
            const fs::path p = *opt.checkpoint_dir / ablation_name(a) / kCheckpointFile;
            if (!fs::exists(p)) continue;
            const std::string name = mmen_method_name(a);
            extra[name] = mmen_selector(std::make_shared<const SavedModel>(load_model(p)));
            if (std::find(model_methods.begin(), model_methods.end(), name) == model_methods.end())
                model_methods.push_back(name);
        }
    }
    std::vector<std::string> methods = opt.methods;
    if (methods.empty()) {
        methods = model_methods;
        methods.insert(methods.end(), builtin_methods().begin(), builtin_methods().end());
    }

    std::vector<CascadeGraph> graphs;
    graphs.reserve(names->size());
    for (const auto &n : *names) graphs.push_back(load_cascade(opt.data / n));
    std::vector<EvalGraph> eval;
    for (std::size_t i = 0; i < graphs.size(); ++i) eval.push_back({(*names)[i], &graphs[i]});

    EvalReport report = compare_methods(eval, methods, opt.sir, opt.fraction, extra, opt.d_cover, opt.jobs);

    std::error_code ec;
    fs::create_directories(opt.out, ec);
    if (ec) throw DataError("cannot create " + opt.out.string() + ": " + ec.message());
    {
        std::ofstream csv(opt.out / "report.csv", std::ios::binary);
        if (!csv) throw DataError("cannot write " + (opt.out / "report.csv").string());
        write_report_csv(csv, report);
    }
    std::ofstream txt(opt.out / "report.txt", std::ios::binary);
    if (!txt) throw DataError("cannot write " + (opt.out / "report.txt").string());
    write_report_table(txt, report);
    return report;
}

} // namespace mmen
