#pragma once

#include "mmen/baselines.hpp"
#include "mmen/epidemic.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <ostream>
#include <string>
#include <vector>

namespace mmen {

/// Picks a seed set for one graph; `graph_index` identifies the graph within the run.
using Selector = std::function<SeedSet(const CascadeGraph &, std::size_t graph_index, double fraction)>;

struct EvalGraph {
    std::string name;
    const CascadeGraph *graph = nullptr;
};

struct EvalRow {
    std::string graph;
    std::string method;
    double st_mean = 0.0;
    double st_stderr = 0.0;
    double r = 0.0;
    double mu = 0.0;
    std::size_t runs = 0;
    double fraction = 0.0;
};

struct MethodSummary {
    std::string method;
    double st_mean = 0.0;   ///< mean of per-graph S_t
    double st_stderr = 0.0; ///< stderr of that mean from the per-graph stderrs
    double r = 0.0;         ///< mean of per-graph R
    std::size_t graphs = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows; ///< graph-major, methods in request order
    std::vector<std::string> methods;
    SirConfig config;
    double fraction = 0.0;

    std::vector<MethodSummary> summary() const {
        std::vector<MethodSummary> out;
        for (const auto &m : methods) {
            MethodSummary s{m};
            double var = 0.0;
            for (const auto &row : rows)
                if (row.method == m) {
                    s.st_mean += row.st_mean;
                    s.r += row.r;
                    var += row.st_stderr * row.st_stderr;
                    ++s.graphs;
                }
            if (s.graphs) {
                const double g = static_cast<double>(s.graphs);
                s.st_mean /= g;
                s.r /= g;
                s.st_stderr = std::sqrt(var) / g;
            }
            out.push_back(s);
        }
        return out;
    }
};

inline const std::vector<std::string> &builtin_methods() {
    static const std::vector<std::string> names{"degree", "kshell", "hindex", "leaderrank", "greedy", "random"};
    return names;
}

/// Seed selectors for the classical baselines plus a seeded uniform `random` control.
inline std::map<std::string, Selector> builtin_selectors(std::uint64_t seed, std::size_t d_cover) {
    std::map<std::string, Selector> m;
    m["degree"] = [](const CascadeGraph &g, std::size_t, double f) { return degree_centrality(g).top(f); };
    m["kshell"] = [](const CascadeGraph &g, std::size_t, double f) { return kshell(g).top(f); };
    m["hindex"] = [](const CascadeGraph &g, std::size_t, double f) { return h_index(g).top(f); };
    m["leaderrank"] = [](const CascadeGraph &g, std::size_t, double f) { return leaderrank(g).top(f); };
    m["greedy"] = [d_cover](const CascadeGraph &g, std::size_t, double f) {
        SeedSet s = greedy_dcover(g, seed_budget(g.num_nodes(), f), d_cover);
        s.fraction = f;
        return s;
    };
    m["random"] = [seed](const CascadeGraph &g, std::size_t gi, double f) {
        std::vector<NodeId> all(g.num_nodes());
        std::iota(all.begin(), all.end(), NodeId{0});
        auto rng = rng::stream(rng::derive(seed, 0xa11d), gi);
        rng::shuffle(all, rng);
        all.resize(seed_budget(g.num_nodes(), f));
        return SeedSet{std::move(all), f};
    };
    return m;
}

/// Evaluates each method's top-`fraction` seeds on every graph: S_t from SIR
/// (same random streams for every method on a graph) and R from seed removal.
inline EvalReport compare_methods(std::span<const EvalGraph> graphs, const std::vector<std::string> &methods,
                                  const SirConfig &cfg, double fraction,
                                  const std::map<std::string, Selector> &extra = {}, std::size_t d_cover = 1,
                                  unsigned jobs = 1) {
    cfg.validate();
    auto selectors = builtin_selectors(cfg.rng_seed, d_cover);
    for (const auto &[name, sel] : extra) selectors[name] = sel;
    for (const auto &m : methods)
        if (!selectors.count(m)) {
            std::string valid;
            for (const auto &[name, sel] : selectors) valid += (valid.empty() ? "" : ", ") + name;
            throw ArgumentError("unknown method '" + m + "' (valid: " + valid + ")");
        }

    EvalReport report;
    report.methods = methods;
    report.config = cfg;
    report.fraction = fraction;
    report.rows.resize(graphs.size() * methods.size());
    parallel_for(graphs.size(), jobs, [&](std::size_t gi) {
        const CascadeGraph &g = *graphs[gi].graph;
        SirConfig per_graph = cfg;
        per_graph.rng_seed = rng::derive(cfg.rng_seed, gi);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const SeedSet seeds = selectors.at(methods[mi])(g, gi, fraction);
            const InfectionRate st = infection_rate(g, seeds.members, per_graph);
            report.rows[gi * methods.size() + mi] =
                EvalRow{graphs[gi].name, methods[mi], st.mean, st.std_error, robustness(g, seeds.members),
                        st.mu, cfg.runs, fraction};
        }
    });
    return report;
}

inline void write_report_csv(std::ostream &out, const EvalReport &report) {
    out << "graph,method,st_mean,st_stderr,r,mu,runs,fraction\n";
    char buf[256];
    for (const auto &row : report.rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%zu,%.10g\n", row.st_mean, row.st_stderr, row.r,
                      row.mu, row.runs, row.fraction);
        out << row.graph << ',' << row.method << ',' << buf;
    }
}

/// Aligned per-method table: method, graph count, mean S_t +- stderr, mean R.
inline void write_report_table(std::ostream &out, const EvalReport &report) {
    std::size_t width = 6;
    for (const auto &m : report.methods) width = std::max(width, m.size());
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %6s  %-20s  %8s\n", static_cast<int>(width), "Method", "graphs",
                  "Infection rate S_t", "R");
    out << buf << std::string(width + 42, '-') << '\n';
    for (const auto &s : report.summary()) {
        std::snprintf(buf, sizeof buf, "%-*s  %6zu  %8.4f +- %-8.4f  %8.4f\n", static_cast<int>(width),
                      s.method.c_str(), s.graphs, s.st_mean, s.st_stderr, s.r);
        out << buf;
    }
}

} // namespace mmen
