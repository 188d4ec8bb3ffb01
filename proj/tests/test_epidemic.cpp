#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace mmen;
using namespace mmen::testing;

TEST(Sir, NoTransmissionStopsAfterOneStep) {
    const CascadeGraph g = synth_cascade(50, 0.1, 0.5, 1);
    const std::vector<NodeId> seeds{3, 7, 9};
    auto rng = rng::stream(1, 0);
    const SirOutcome out = sir_run(g, seeds, 0.0, rng);
    EXPECT_EQ(out.recovered, 3u);
    EXPECT_EQ(out.steps, 1u);
}

TEST(Sir, CertainTransmissionFloodsConnectedGraph) {
    const CascadeGraph g = synth_cascade(80, 0.1, 0.5, 2);
    const std::vector<NodeId> seeds{40};
    auto rng = rng::stream(2, 0);
    const SirOutcome out = sir_run(g, seeds, 1.0, rng);
    EXPECT_EQ(out.recovered, 80u);
    // One step per BFS layer plus the final recovery step.
    std::size_t ecc = 0;
    std::vector<long> dist(80, -1);
    std::vector<NodeId> q{40};
    dist[40] = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
        for (NodeId w : g.neighbors(q[i]))
            if (dist[w] < 0) {
                dist[w] = dist[q[i]] + 1;
                ecc = std::max<std::size_t>(ecc, static_cast<std::size_t>(dist[w]));
                q.push_back(w);
            }
    EXPECT_EQ(out.steps, ecc + 1);
}

TEST(Sir, SpreadsAgainstEdgeDirection) {
    const CascadeGraph g = path_graph(4);
    const std::vector<NodeId> seeds{3};
    auto rng = rng::stream(3, 0);
    EXPECT_EQ(sir_run(g, seeds, 1.0, rng).recovered, 4u);
}

TEST(Sir, EmptySeedSetIsError) {
    const CascadeGraph g = path_graph(4);
    auto rng = rng::stream(3, 0);
    EXPECT_THROW(sir_run(g, {}, 0.5, rng), ArgumentError);
}

TEST(Sir, ChainMatchesClosedForm) {
    const std::size_t n = 8;
    const double mu = 0.5;
    const CascadeGraph g = path_graph(n);
    const std::vector<NodeId> seeds{0};
    double want = 0.0, want_sq = 0.0;
    // P(count = k): k-1 successes then a failure, or all n-1 successes.
    for (std::size_t k = 1; k <= n; ++k) {
        const double p = k < n ? std::pow(mu, static_cast<double>(k - 1)) * (1.0 - mu)
                               : std::pow(mu, static_cast<double>(n - 1));
        want += p * static_cast<double>(k);
        want_sq += p * static_cast<double>(k * k);
    }
    double closed = 0.0;
    for (std::size_t k = 0; k < n; ++k) closed += std::pow(mu, static_cast<double>(k));
    EXPECT_NEAR(want, closed, 1e-12);

    const std::size_t runs = 100000;
    auto rng = rng::stream(4, 0);
    double sum = 0.0;
    for (std::size_t r = 0; r < runs; ++r) sum += static_cast<double>(sir_run(g, seeds, mu, rng).recovered);
    const double sigma = std::sqrt((want_sq - want * want) / runs);
    EXPECT_LT(std::abs(sum / runs - closed), 3.0 * sigma);
}

TEST(InfectionRate, DegenerateRates) {
    const CascadeGraph g = synth_cascade(100, 0.1, 0.5, 5);
    const std::vector<NodeId> seeds{1, 2, 3, 4, 5};
    const InfectionRate none = infection_rate(g, seeds, SirConfig{.mu = 0.0, .runs = 50});
    EXPECT_EQ(none.mean, 0.05);
    EXPECT_EQ(none.std_error, 0.0);
    const InfectionRate all = infection_rate(g, seeds, SirConfig{.mu = 1.0, .runs = 50});
    EXPECT_EQ(all.mean, 1.0);
    EXPECT_EQ(all.std_error, 0.0);
}

TEST(InfectionRate, StandardErrorShrinksAsRootRuns) {
    const CascadeGraph g = synth_cascade(200, 0.1, 0.5, 6);
    const std::vector<NodeId> seeds{0};
    std::vector<double> se;
    for (std::size_t runs : {100u, 400u, 1600u})
        se.push_back(infection_rate(g, seeds, SirConfig{.mu = 0.3, .runs = runs, .rng_seed = 9}).std_error);
    EXPECT_NEAR(se[0] / se[1], 2.0, 0.4);
    EXPECT_NEAR(se[1] / se[2], 2.0, 0.4);
}

TEST(InfectionRate, DeterministicPerSeedAndAtLeastSeedFraction) {
    const CascadeGraph g = synth_cascade(120, 0.1, 0.5, 7);
    const std::vector<NodeId> seeds{0, 5};
    const SirConfig cfg{.runs = 30, .rng_seed = 11};
    const InfectionRate a = infection_rate(g, seeds, cfg), b = infection_rate(g, seeds, cfg);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_GE(a.mean, 2.0 / 120.0);
    EXPECT_LE(a.mean, 1.0);
    EXPECT_EQ(a.mu, default_mu(g));
}

TEST(InfectionRate, InvalidConfig) {
    const CascadeGraph g = path_graph(4);
    const std::vector<NodeId> seeds{0};
    EXPECT_THROW(infection_rate(g, seeds, SirConfig{.mu = 1.5}), ArgumentError);
    EXPECT_THROW(infection_rate(g, seeds, SirConfig{.runs = 0}), ArgumentError);
}

TEST(DefaultMu, ThresholdFormula) {
    const CascadeGraph g = synth_cascade(300, 0.1, 0.5, 8);
    double k1 = 0.0, k2 = 0.0;
    for (NodeId v = 0; v < 300; ++v) {
        const double k = static_cast<double>(g.undirected_degree(v));
        k1 += k / 300.0;
        k2 += k * k / 300.0;
    }
    EXPECT_NEAR(default_mu(g), std::min(1.0, 1.5 * k1 / (k2 - k1)), 1e-12);
    EXPECT_GT(default_mu(g), 0.0);
    EXPECT_LT(default_mu(g), 1.0);
}

TEST(Robustness, TrivialCases) {
    const CascadeGraph g = synth_cascade(40, 0.1, 0.5, 9);
    EXPECT_EQ(robustness(g, {}), 1.0);
    std::vector<NodeId> all(40);
    std::iota(all.begin(), all.end(), NodeId{0});
    EXPECT_EQ(robustness(g, all), 0.0);
    const std::vector<NodeId> center{0};
    EXPECT_DOUBLE_EQ(robustness(star_graph(9), center), 1.0 / 10.0);
}

TEST(Robustness, AntitoneUnderSupersets) {
    const CascadeGraph g = synth_cascade(150, 0.2, 0.5, 10);
    std::vector<NodeId> order(150);
    std::iota(order.begin(), order.end(), NodeId{0});
    std::mt19937_64 rng(10);
    rng::shuffle(order, rng);
    double prev = 1.0;
    for (std::size_t k = 1; k <= 150; k += 7) {
        const double r = robustness(g, std::span(order).first(k));
        EXPECT_LE(r, prev);
        prev = r;
    }
}

TEST(Compare, RandomWithoutTransmissionGivesSeedFraction) {
    std::vector<CascadeGraph> graphs;
    for (std::uint64_t s = 0; s < 3; ++s) graphs.push_back(synth_cascade(100, 0.1, 0.5, s));
    std::vector<EvalGraph> eval;
    for (std::size_t i = 0; i < 3; ++i) eval.push_back({"g" + std::to_string(i), &graphs[i]});
    const EvalReport rep = compare_methods(eval, {"random"}, SirConfig{.mu = 0.0, .runs = 10}, 0.05);
    ASSERT_EQ(rep.rows.size(), 3u);
    for (const auto &row : rep.rows) EXPECT_EQ(row.st_mean, 0.05);
}

TEST(Compare, RowShapeCsvAndUnknownMethod) {
    std::vector<CascadeGraph> graphs;
    for (std::uint64_t s = 0; s < 4; ++s) graphs.push_back(synth_cascade(80, 0.1, 0.5, 20 + s));
    std::vector<EvalGraph> eval;
    for (std::size_t i = 0; i < 4; ++i) eval.push_back({"g" + std::to_string(i), &graphs[i]});
    const auto &methods = builtin_methods();
    const EvalReport rep = compare_methods(eval, methods, SirConfig{.runs = 20, .rng_seed = 3}, 0.05);
    EXPECT_EQ(rep.rows.size(), 4 * methods.size());
    for (const auto &row : rep.rows) {
        EXPECT_GE(row.st_mean, 0.0);
        EXPECT_LE(row.st_mean, 1.0);
        EXPECT_GE(row.r, 0.0);
        EXPECT_LE(row.r, 1.0);
    }
    std::ostringstream csv;
    write_report_csv(csv, rep);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "graph,method,st_mean,st_stderr,r,mu,runs,fraction");
    std::size_t n = 0;
    while (std::getline(in, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 7) << line;
        ++n;
    }
    EXPECT_EQ(n, rep.rows.size());

    try {
        compare_methods(eval, {"degree", "pagerank"}, SirConfig{}, 0.05);
        FAIL() << "expected ArgumentError";
    } catch (const ArgumentError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("pagerank"), std::string::npos);
        EXPECT_NE(msg.find("leaderrank"), std::string::npos);
    }
}

TEST(Compare, WorkerCountDoesNotChangeReport) {
    std::vector<CascadeGraph> graphs;
    for (std::uint64_t s = 0; s < 5; ++s) graphs.push_back(synth_cascade(90, 0.1, 0.5, 40 + s));
    std::vector<EvalGraph> eval;
    for (std::size_t i = 0; i < 5; ++i) eval.push_back({"g" + std::to_string(i), &graphs[i]});
    const SirConfig cfg{.runs = 15, .rng_seed = 8};
    std::ostringstream a, b;
    write_report_csv(a, compare_methods(eval, builtin_methods(), cfg, 0.05, {}, 1, 1));
    write_report_csv(b, compare_methods(eval, builtin_methods(), cfg, 0.05, {}, 1, 4));
    EXPECT_EQ(a.str(), b.str());
}

TEST(Compare, GreedyFragmentsMoreThanRandom) {
    std::vector<CascadeGraph> graphs;
    for (std::uint64_t s = 0; s < 20; ++s) graphs.push_back(synth_cascade(500, 0.1, 0.5, 100 + s));
    std::vector<EvalGraph> eval;
    for (std::size_t i = 0; i < graphs.size(); ++i) eval.push_back({"g" + std::to_string(i), &graphs[i]});
    const EvalReport rep = compare_methods(eval, {"greedy", "random"}, SirConfig{.runs = 5, .rng_seed = 1}, 0.05);
    const auto summary = rep.summary();
    EXPECT_LT(summary[0].r, summary[1].r);
}

TEST(Compare, TableListsEveryMethod) {
    const CascadeGraph g = synth_cascade(60, 0.1, 0.5, 2);
    const std::vector<EvalGraph> eval{{"only", &g}};
    std::ostringstream out;
    write_report_table(out, compare_methods(eval, {"degree", "random"}, SirConfig{.runs = 5}, 0.05));
    EXPECT_NE(out.str().find("degree"), std::string::npos);
    EXPECT_NE(out.str().find("random"), std::string::npos);
    EXPECT_NE(out.str().find("Infection rate S_t"), std::string::npos);
}
