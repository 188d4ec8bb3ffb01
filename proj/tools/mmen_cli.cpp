#include "mmen/mmen.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace mmen;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

void add_walk_flags(CLI::App *app, WalkConfig &walk) {
    app->add_option("--walks", walk.walks_per_node, "random walks per node")->capture_default_str();
    app->add_option("--walk-len", walk.walk_len, "steps per walk")->capture_default_str();
    app->add_flag("--undirected", walk.undirected, "walk and attend over both edge directions");
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Key-node identification in information cascades"};
    app.set_config("--config", "", "key = value file supplying flags; explicit flags take precedence");
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    unsigned jobs = 1;
    app.add_option("--seed", seed, "master RNG seed")->capture_default_str();
    app.add_option("--jobs", jobs, "maximum worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    GenOptions gen;
    auto *gen_cmd = app.add_subcommand("gen", "generate a synthetic cascade dataset");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();
    gen_cmd->add_option("--graphs", gen.n_graphs, "number of cascades")->capture_default_str();
    gen_cmd->add_option("--min-nodes", gen.min_nodes, "smallest cascade size")->capture_default_str();
    gen_cmd->add_option("--max-nodes", gen.max_nodes, "largest cascade size")->capture_default_str();
    gen_cmd->add_option("--extra-edges", gen.extra_edge_frac, "non-tree edges per node")->capture_default_str();
    gen_cmd->add_option("--attr-noise", gen.attr_noise, "log-normal noise on follower counts")->capture_default_str();

    TrainOptions tr;
    std::string ablate = "none";
    auto *train_cmd = app.add_subcommand("train", "train a model on the manifest's training split");
    train_cmd->add_option("--data", tr.data, "dataset directory with manifest.json")->required();
    train_cmd->add_option("--out", tr.out, "output directory")->required();
    train_cmd->add_option("--epochs", tr.train.epochs, "maximum epochs")->capture_default_str();
    train_cmd->add_option("--batch", tr.train.batch_size, "graphs per batch")->capture_default_str();
    train_cmd->add_option("--lr", tr.train.lr, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--lambda", tr.train.lambda, "seed-size penalty weight")->capture_default_str();
    train_cmd->add_option("--d-cover", tr.train.d_cover, "coverage radius in hops")->capture_default_str();
    train_cmd->add_option("--patience", tr.train.patience, "early-stopping patience")->capture_default_str();
    train_cmd->add_option("--hidden", tr.model.hidden, "hidden width")->capture_default_str();
    train_cmd->add_option("--heads", tr.model.heads, "attention heads")->capture_default_str();
    train_cmd->add_option("--layers", tr.model.layers, "GAT + memory blocks per view")->capture_default_str();
    train_cmd->add_option("--mem-groups", tr.model.mem_groups, "memory groups")->capture_default_str();
    train_cmd->add_option("--mem-slots", tr.model.mem_slots, "slots per memory group")->capture_default_str();
    train_cmd->add_option("--ablate", ablate, "none, no-user, no-memory, no-fusion, or all")->capture_default_str();
    add_walk_flags(train_cmd, tr.walk);

    ScoreOptions sc;
    std::string dump_features;
    auto *score_cmd = app.add_subcommand("score", "score the nodes of one cascade");
    score_cmd->add_option("--ckpt", sc.checkpoint, "checkpoint written by train")->required();
    score_cmd->add_option("--graph", sc.graph, "cascade directory")->required();
    score_cmd->add_option("--out", sc.out, "scores CSV")->capture_default_str();
    score_cmd->add_option("--fraction", sc.fraction, "seed fraction flagged in is_seed")->capture_default_str();
    score_cmd->add_option("--dump-features", dump_features, "also write both feature views to this CSV");

    CompareOptions cmp;
    std::string ckpt, ckpt_dir, methods;
    double mu = -1.0;
    auto *cmp_cmd = app.add_subcommand("compare", "evaluate seed selectors with SIR and robustness");
    cmp_cmd->add_option("--data", cmp.data, "dataset directory with manifest.json")->required();
    cmp_cmd->add_option("--out", cmp.out, "report directory")->required();
    cmp_cmd->add_option("--ckpt", ckpt, "checkpoint evaluated as 'mmen'");
    cmp_cmd->add_option("--ckpt-dir", ckpt_dir, "directory from train --ablate all; adds every variant");
    cmp_cmd->add_option("--methods", methods, "comma-separated methods (default: all available)");
    cmp_cmd->add_option("--split", cmp.split, "train, val, test or all")->capture_default_str();
    cmp_cmd->add_option("--fraction", cmp.fraction, "seed fraction")->capture_default_str();
    cmp_cmd->add_option("--d-cover", cmp.d_cover, "coverage radius for greedy")->capture_default_str();
    cmp_cmd->add_option("--runs", cmp.sir.runs, "SIR runs per graph and method")->capture_default_str();
    cmp_cmd->add_option("--mu", mu, "infection probability (default: 1.5x epidemic threshold)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*gen_cmd) {
            gen.seed = seed;
            const Manifest m = cmd_gen(gen);
            std::cout << "wrote " << m.graphs.size() << " cascades to " << gen.out.string() << " (train "
                      << m.train.size() << ", val " << m.val.size() << ", test " << m.test.size() << ")\n";
        } else if (*train_cmd) {
            tr.train.rng_seed = seed;
            tr.train.jobs = jobs;
            tr.walk.rng_seed = rng::derive(seed, 0x3a1c);
            tr.all_variants = ablate == "all";
            if (!tr.all_variants) tr.model.ablation = parse_ablation(ablate);
            tr.log = &std::cerr;
            for (const auto &s : cmd_train(tr))
                std::cout << ablation_name(s.variant) << ": best val loss " << s.result.best_val_loss << " at epoch "
                          << s.result.best_epoch << ", checkpoint " << s.checkpoint.string() << '\n';
        } else if (*score_cmd) {
            if (!dump_features.empty()) sc.dump_features = dump_features;
            const GraphScores s = cmd_score(sc);
            std::cout << "scored " << s.fused.size() << " nodes, " << s.seeds.members.size() << " seeds\n";
        } else if (*cmp_cmd) {
            if (!ckpt.empty()) cmp.checkpoint = ckpt;
            if (!ckpt_dir.empty()) cmp.checkpoint_dir = ckpt_dir;
            if (!methods.empty())
                for (auto m : io::split(methods, ','))
                    if (!io::trim(m).empty()) cmp.methods.emplace_back(io::trim(m));
            if (mu >= 0.0) cmp.sir.mu = mu;
            cmp.sir.rng_seed = seed;
            cmp.jobs = jobs;
            const EvalReport r = cmd_compare(cmp);
            write_report_table(std::cout, r);
        }
    } catch (const ArgumentError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericError &e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const DataError &e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kData;
    }
    return kOk;
}
