#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace mmen;
using namespace mmen::testing;

namespace {

double column_mean(const FeatureMatrix &m, std::size_t c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) s += m.at(r, c);
    return s / static_cast<double>(m.rows);
}

double column_std(const FeatureMatrix &m, std::size_t c) {
    const double mu = column_mean(m, c);
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r) s += (m.at(r, c) - mu) * (m.at(r, c) - mu);
    return std::sqrt(s / static_cast<double>(m.rows));
}

double skewness(const std::vector<double> &x) {
    const double n = static_cast<double>(x.size());
    const double mu = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        m2 += (v - mu) * (v - mu);
        m3 += (v - mu) * (v - mu) * (v - mu);
    }
    m2 /= n;
    m3 /= n;
    return m3 / std::pow(m2, 1.5);
}

std::optional<std::size_t> bfs_oracle(const CascadeGraph &g, NodeId from, NodeId to) {
    std::vector<long> dist(g.num_nodes(), -1);
    std::vector<NodeId> queue{from};
    dist[from] = 0;
    for (std::size_t i = 0; i < queue.size(); ++i)
        for (const auto &[s, t] : g.edges())
            if (s == queue[i] && dist[t] < 0) {
                dist[t] = dist[s] + 1;
                queue.push_back(t);
            }
    if (dist[to] < 0) return std::nullopt;
    return static_cast<std::size_t>(dist[to]);
}

// Relabels node v as perm[v], carrying its label and profile along.
CascadeGraph permuted(const CascadeGraph &g, const std::vector<NodeId> &perm) {
    const std::size_t n = g.num_nodes();
    std::vector<Edge> edges;
    for (const auto &[s, t] : g.edges()) edges.emplace_back(perm[s], perm[t]);
    std::vector<UserRecord> users(n);
    std::vector<std::string> labels(n);
    for (NodeId v = 0; v < n; ++v) {
        users[perm[v]] = g.user(v);
        labels[perm[v]] = g.label(v);
    }
    return CascadeGraph(n, std::move(edges), std::move(users), perm[g.source()], std::move(labels));
}

} // namespace

TEST(UserAttributes, AbsentRecordAtSourceIsZero) {
    const CascadeGraph g = star_graph(3);
    const auto x = user_attribute_vector(g, 0);
    for (double v : x) EXPECT_EQ(v, 0.0);
}

TEST(UserAttributes, DirectReadOff) {
    std::vector<UserRecord> users(3);
    users[2].name = "ab";
    users[2].verified = true;
    const CascadeGraph g(3, {{0, 1}, {1, 2}}, users);
    const auto x = user_attribute_vector(g, 2);
    const std::array<double, 9> want{2, 0, 0, 0, 0, 1, 0, 0, 2};
    EXPECT_EQ(x, want);
}

TEST(UserAttributes, CountsCodePointsNotBytes) {
    std::vector<UserRecord> users(2);
    users[0].name = "\xc3\xa9t\xc3\xa9";        // 3 code points
    users[0].description = "\xf0\x9f\x98\x80!"; // 2 code points
    const CascadeGraph g(2, {{0, 1}}, users);
    const auto x = user_attribute_vector(g, 0);
    EXPECT_EQ(x[0], 3.0);
    EXPECT_EQ(x[1], 2.0);
}

TEST(UserAttributes, UnreachableDepthIsZero) {
    const CascadeGraph g(4, {{0, 1}, {2, 3}}, {}, NodeId{0});
    EXPECT_EQ(user_attribute_vector(g, 3)[8], 0.0);
    EXPECT_EQ(user_attribute_vector(g, 1)[8], 1.0);
}

TEST(UserAttributes, DepthMatchesBfsOracle) {
    const CascadeGraph g = synth_cascade(120, 0.2, 0.5, 9);
    const FeatureMatrix m = user_attribute_matrix(g);
    ASSERT_EQ(m.rows, 120u);
    ASSERT_EQ(m.cols, kUserDim);
    for (NodeId v = 0; v < 120; ++v) {
        const auto d = bfs_oracle(g, g.source(), v);
        EXPECT_EQ(m.at(v, 8), d ? static_cast<double>(*d) : 0.0);
        EXPECT_EQ(user_attribute_vector(g, v)[8], m.at(v, 8));
    }
}

TEST(Normalize, ConstantColumnBecomesZero) {
    FeatureMatrix m(5, 2, View::structure);
    for (std::size_t r = 0; r < 5; ++r) {
        m.at(r, 0) = 3.25;
        m.at(r, 1) = static_cast<double>(r);
    }
    const FeatureMatrix z = normalize_features(m);
    for (std::size_t r = 0; r < 5; ++r) EXPECT_EQ(z.at(r, 0), 0.0);
}

TEST(Normalize, ZeroMeanUnitStd) {
    const CascadeGraph g = synth_cascade(300, 0.1, 0.5, 2);
    for (const FeatureMatrix &m : {user_features(g), random_walk_features(g, WalkConfig{})}) {
        for (std::size_t c = 0; c < m.cols; ++c) {
            const double sd = column_std(m, c);
            EXPECT_NEAR(column_mean(m, c), 0.0, 1e-9);
            if (sd != 0.0) {
                EXPECT_NEAR(sd, 1.0, 1e-9) << view_name(m.view) << " column " << c;
            }
        }
        for (double x : m.values) EXPECT_TRUE(std::isfinite(x));
    }
}

TEST(Normalize, Log1pReducesSkew) {
    const CascadeGraph g = synth_cascade(500, 0.1, 1.0, 5);
    const FeatureMatrix raw = user_attribute_matrix(g);
    const FeatureMatrix norm = normalize_features(raw);
    for (std::size_t c : {2u, 4u}) {
        std::vector<double> before, after;
        for (std::size_t r = 0; r < raw.rows; ++r) {
            before.push_back(raw.at(r, c));
            after.push_back(norm.at(r, c));
        }
        EXPECT_GT(skewness(before), 1.0) << "column " << c;
        EXPECT_LT(std::abs(skewness(after)), std::abs(skewness(before))) << "column " << c;
    }
}

TEST(Normalize, RejectsNonFinite) {
    FeatureMatrix m(2, 1, View::structure);
    m.at(0, 0) = std::nan("");
    EXPECT_THROW(normalize_features(m), DataError);
}

TEST(RandomWalk, Dimensions) {
    const CascadeGraph g = synth_cascade(50, 0.1, 0.5, 1);
    EXPECT_EQ(user_features(g).cols, 9u);
    EXPECT_EQ(random_walk_features(g, WalkConfig{}).cols, 8u);
    EXPECT_EQ(random_walk_features(g, WalkConfig{}).rows, 50u);
}

TEST(RandomWalk, InvalidConfig) {
    const CascadeGraph g = star_graph(3);
    EXPECT_THROW(random_walk_stats(g, WalkConfig{.walks_per_node = 0}), ArgumentError);
    EXPECT_THROW(random_walk_stats(g, WalkConfig{.walk_len = 0}), ArgumentError);
}

TEST(RandomWalk, IsolatedNode) {
    const CascadeGraph g(4, {{0, 1}, {1, 2}});
    const FeatureMatrix m = random_walk_stats(g, WalkConfig{});
    const WalkConfig cfg;
    const double steps = static_cast<double>(cfg.walks_per_node * cfg.walk_len);
    EXPECT_EQ(m.at(3, 0), 0.0);
    EXPECT_EQ(m.at(3, 1), 0.0);
    EXPECT_EQ(m.at(3, 4), 1.0);
    EXPECT_EQ(m.at(3, 5), 1.0 / (steps + 1.0));
    for (NodeId v = 0; v < 3; ++v) EXPECT_GE(m.at(v, 5), m.at(3, 5));
}

TEST(RandomWalk, StarCenterVersusLeaf) {
    const CascadeGraph g = star_graph(8);
    const FeatureMatrix directed = random_walk_stats(g, WalkConfig{});
    const FeatureMatrix both = random_walk_stats(g, WalkConfig{.undirected = true});
    for (NodeId leaf = 1; leaf <= 8; ++leaf) {
        EXPECT_GT(directed.at(0, 5), directed.at(leaf, 5));
        // Every second undirected step lands back on the center.
        EXPECT_EQ(both.at(0, 4), 0.5);
        EXPECT_LT(both.at(leaf, 4), both.at(0, 4));
    }
}

TEST(RandomWalk, SameSeedIsBitwiseIdentical) {
    const CascadeGraph g = synth_cascade(200, 0.1, 0.5, 8);
    const WalkConfig cfg{.rng_seed = 77};
    EXPECT_EQ(random_walk_features(g, cfg).values, random_walk_features(g, cfg).values);
    WalkConfig other = cfg;
    other.rng_seed = 78;
    EXPECT_NE(random_walk_stats(g, cfg).values, random_walk_stats(g, other).values);
}

TEST(RandomWalk, RelabelingPermutesRowsBitwise) {
    const CascadeGraph g = synth_cascade(150, 0.2, 0.5, 4);
    std::vector<NodeId> perm(150);
    std::iota(perm.begin(), perm.end(), NodeId{0});
    std::mt19937_64 rng(99);
    rng::shuffle(perm, rng);
    const CascadeGraph h = permuted(g, perm);
    for (bool undirected : {false, true}) {
        const WalkConfig cfg{.rng_seed = 5, .undirected = undirected};
        const FeatureMatrix a = random_walk_features(g, cfg), b = random_walk_features(h, cfg);
        const FeatureMatrix ua = user_features(g), ub = user_features(h);
        for (NodeId v = 0; v < 150; ++v) {
            for (std::size_t c = 0; c < kStructDim; ++c) EXPECT_EQ(a.at(v, c), b.at(perm[v], c));
            for (std::size_t c = 0; c < kUserDim; ++c) EXPECT_EQ(ua.at(v, c), ub.at(perm[v], c));
        }
    }
}

// Independent walker with its own RNG and 10x the walks. For the per-walk mean
// columns (mean visited degree, return frequency, completed walks, depth) the
// implementation's estimate must sit within 3 sigma of the oracle for almost
// every node.
TEST(RandomWalk, MatchesOversampledWalker) {
    const CascadeGraph g = synth_cascade(120, 0.2, 0.5, 6);
    const WalkConfig cfg{.walks_per_node = 40, .walk_len = 4, .rng_seed = 3};
    const FeatureMatrix m = random_walk_stats(g, cfg);
    std::mt19937_64 rng(123456);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const std::size_t oracle_walks = 10 * cfg.walks_per_node;
    const double len = static_cast<double>(cfg.walk_len);
    std::size_t checked = 0, outside3 = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        // per-walk quantities for columns 2, 4, 6, 7
        std::array<std::vector<double>, 4> samples;
        for (std::size_t w = 0; w < oracle_walks; ++w) {
            NodeId pos = v;
            std::size_t depth = 0;
            double deg = 0.0, ret = 0.0, dep = 0.0;
            bool complete = true;
            for (std::size_t s = 0; s < cfg.walk_len; ++s) {
                const auto nb = g.out_neighbors(pos);
                if (nb.empty()) {
                    pos = v;
                    depth = 0;
                    complete = false;
                } else {
                    pos = nb[static_cast<std::size_t>(unif(rng) * static_cast<double>(nb.size()))];
                    ++depth;
                }
                deg += static_cast<double>(g.out_degree(pos));
                ret += pos == v;
                dep += static_cast<double>(depth);
            }
            samples[0].push_back(deg / len);
            samples[1].push_back(ret / len);
            samples[2].push_back(complete ? 1.0 : 0.0);
            samples[3].push_back(dep / len);
        }
        const std::size_t cols[] = {2, 4, 6, 7};
        for (std::size_t k = 0; k < 4; ++k) {
            const auto &x = samples[k];
            const double n = static_cast<double>(x.size());
            const double mu = std::accumulate(x.begin(), x.end(), 0.0) / n;
            double var = 0.0;
            for (double y : x) var += (y - mu) * (y - mu);
            var /= n - 1.0;
            const double sigma = std::sqrt(var / static_cast<double>(cfg.walks_per_node) + var / n);
            const double diff = std::abs(m.at(v, cols[k]) - mu);
            ++checked;
            if (sigma == 0.0) {
                EXPECT_NEAR(m.at(v, cols[k]), mu, 1e-12) << "node " << v << " column " << cols[k];
                continue;
            }
            EXPECT_LT(diff, 5.0 * sigma) << "node " << v << " column " << cols[k];
            outside3 += diff > 3.0 * sigma;
        }
    }
    EXPECT_LE(static_cast<double>(outside3), 0.01 * static_cast<double>(checked)) << outside3 << " of " << checked;
}

TEST(FeatureDump, HeaderAndRowCount) {
    const CascadeGraph g = star_graph(4);
    const FeatureMatrix u = user_features(g), s = random_walk_features(g, WalkConfig{});
    const FeatureMatrix *views[] = {&u, &s};
    std::ostringstream out;
    write_features_csv(out, g, views);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "node,view,f0,f1,f2,f3,f4,f5,f6,f7,f8");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 10u);
}
