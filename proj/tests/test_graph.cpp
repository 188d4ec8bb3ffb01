#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace mmen;
using namespace mmen::testing;

namespace {

std::set<NodeId> as_set(const std::vector<NodeId> &v) { return {v.begin(), v.end()}; }

// Plain reverse-edge BFS over an adjacency matrix.
std::set<NodeId> reverse_bfs_oracle(const CascadeGraph &g, NodeId v, std::size_t d) {
    const std::size_t n = g.num_nodes();
    std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
    for (const auto &[s, t] : g.edges()) adj[s][t] = true;
    std::set<NodeId> reached{v}, frontier{v};
    for (std::size_t hop = 0; hop < d; ++hop) {
        std::set<NodeId> next;
        for (NodeId x : frontier)
            for (NodeId u = 0; u < n; ++u)
                if (adj[u][x] && !reached.count(u)) next.insert(u);
        reached.insert(next.begin(), next.end());
        frontier = next;
    }
    return reached;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

std::size_t component_oracle(const CascadeGraph &g, const std::set<NodeId> &removed) {
    UnionFind uf(g.num_nodes());
    for (const auto &[s, t] : g.edges())
        if (!removed.count(s) && !removed.count(t)) uf.unite(s, t);
    std::vector<std::size_t> size(g.num_nodes(), 0);
    std::size_t best = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        if (!removed.count(v)) best = std::max(best, ++size[uf.find(v)]);
    return best;
}

} // namespace

TEST(CascadeGraph, DropsSelfLoopsAndDuplicates) {
    CascadeGraph g(3, {{0, 1}, {0, 1}, {1, 1}, {1, 2}});
    EXPECT_EQ(g.num_edges(), 2u);
    EXPECT_EQ(g.edges()[0], Edge(0, 1));
    EXPECT_EQ(g.edges()[1], Edge(1, 2));
    EXPECT_EQ(g.out_degree(0), 1u);
    EXPECT_EQ(g.in_degree(2), 1u);
}

TEST(CascadeGraph, RejectsOutOfRangeEndpoint) {
    EXPECT_THROW(CascadeGraph(2, {{0, 2}}), ArgumentError);
}

TEST(CascadeGraph, UndirectedViewMergesReciprocalEdges) {
    CascadeGraph g(3, {{0, 1}, {1, 0}, {1, 2}});
    EXPECT_EQ(g.undirected_degree(0), 1u);
    EXPECT_EQ(g.undirected_degree(1), 2u);
}

TEST(CascadeGraph, SourceIsRootReachingAll) {
    CascadeGraph g(4, {{2, 0}, {2, 1}, {0, 3}});
    EXPECT_EQ(g.source(), 2u);
    // Two roots: no single node reaches everything, so node 0.
    CascadeGraph h(4, {{1, 0}, {2, 3}});
    EXPECT_EQ(h.source(), 0u);
}

TEST(SeedBudget, CeilOfFraction) {
    EXPECT_EQ(seed_budget(100, 0.05), 5u);
    EXPECT_EQ(seed_budget(101, 0.05), 6u);
    EXPECT_EQ(seed_budget(100, 0.07), 7u);
    EXPECT_EQ(seed_budget(3, 0.05), 1u);
    EXPECT_EQ(seed_budget(10, 1.0), 10u);
    EXPECT_THROW(seed_budget(10, 0.0), ArgumentError);
    EXPECT_THROW(seed_budget(10, 1.5), ArgumentError);
}

TEST(LoadCascade, TwoEdgeStar) {
    TempDir dir("star");
    write_file(dir / "edges.tsv", "0\t1\t5\n0\t2\t7.5\n");
    const CascadeGraph g = load_cascade(dir.path());
    EXPECT_EQ(g.num_nodes(), 3u);
    EXPECT_EQ(g.num_edges(), 2u);
    EXPECT_EQ(g.source(), 0u);
    EXPECT_EQ(g.user(2).retweet_delay_s, 7.5);
    EXPECT_FALSE(g.user(0).retweet_delay_s.has_value());
}

TEST(LoadCascade, DuplicateEdgeKeptOnce) {
    TempDir dir("dup");
    write_file(dir / "edges.tsv", "0\t1\t1\n0\t1\t1\n");
    EXPECT_EQ(load_cascade(dir.path()).num_edges(), 1u);
}

TEST(LoadCascade, DensifiesIdsInFirstAppearanceOrder) {
    TempDir dir("labels");
    write_file(dir / "edges.tsv", "# comment\nalice\tbob\t\nbob\tcarol\n");
    const CascadeGraph g = load_cascade(dir.path());
    ASSERT_EQ(g.num_nodes(), 3u);
    EXPECT_EQ(g.label(0), "alice");
    EXPECT_EQ(g.label(1), "bob");
    EXPECT_EQ(g.label(2), "carol");
    EXPECT_EQ(g.edges()[1], Edge(1, 2));
}

TEST(LoadCascade, MalformedLineReportsLineNumber) {
    TempDir dir("bad");
    write_file(dir / "edges.tsv", "0\t1\t1\n# ok\n0 2\n");
    try {
        load_cascade(dir.path());
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos) << e.what();
    }
}

TEST(LoadCascade, NegativeDelayIsParseError) {
    TempDir dir("neg");
    write_file(dir / "edges.tsv", "0\t1\t-4\n");
    EXPECT_THROW(load_cascade(dir.path()), ParseError);
}

TEST(LoadCascade, EmptyEdgeFileIsError) {
    TempDir dir("empty");
    write_file(dir / "edges.tsv", "# nothing here\n");
    EXPECT_THROW(load_cascade(dir.path()), DataError);
}

TEST(LoadCascade, MissingDirectoryIsError) {
    EXPECT_THROW(load_cascade("/nonexistent/mmen/graph"), DataError);
}

TEST(LoadCascade, DanglingUserRowIsError) {
    TempDir dir("dangling");
    write_file(dir / "edges.tsv", "0\t1\t1\n");
    write_file(dir / "users.tsv", "id\tname\n0\ta\n7\tb\n");
    EXPECT_THROW(load_cascade(dir.path()), ParseError);
}

TEST(LoadCascade, UsersWithAbsentCells) {
    TempDir dir("users");
    write_file(dir / "edges.tsv", "0\t1\t1\n");
    write_file(dir / "users.tsv",
               "id\tname\tdescription\tfollowers\tfriends\tstatuses\tverified\tgeo_enabled\n"
               "0\tab\t\t0\t\t12\ttrue\t\n");
    const CascadeGraph g = load_cascade(dir.path());
    const UserRecord &u = g.user(0);
    EXPECT_EQ(u.name, "ab");
    EXPECT_FALSE(u.description);
    ASSERT_TRUE(u.followers_count);
    EXPECT_EQ(*u.followers_count, 0u); // zero is present, not absent
    EXPECT_FALSE(u.friends_count);
    EXPECT_EQ(u.statuses_count, 12u);
    EXPECT_EQ(u.verified, true);
    EXPECT_FALSE(u.geo_enabled);
    UserRecord want;
    want.retweet_delay_s = 1.0;
    EXPECT_EQ(g.user(1), want);
}

TEST(LoadCascade, RoundTripsSyntheticGraph) {
    const CascadeGraph g = synth_cascade(1000, 0.1, 0.5, 3);
    TempDir dir("rt");
    save_cascade(g, dir.path());
    const CascadeGraph h = load_cascade(dir.path());
    ASSERT_EQ(h.num_nodes(), g.num_nodes());
    EXPECT_EQ(h.edges(), g.edges());
    EXPECT_EQ(h.users(), g.users());
    EXPECT_EQ(h.source(), g.source());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto a = g.out_neighbors(v), b = h.out_neighbors(v);
        ASSERT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end()));
    }
}

TEST(OutNeighborhood, PathGraph) {
    const CascadeGraph g = path_graph(3);
    EXPECT_EQ(out_neighborhood(g, 2, 1), (std::vector<NodeId>{1, 2}));
    EXPECT_EQ(out_neighborhood(g, 2, 2), (std::vector<NodeId>{0, 1, 2}));
    EXPECT_EQ(out_neighborhood(g, 0, 3), (std::vector<NodeId>{0}));
}

TEST(OutNeighborhood, Errors) {
    const CascadeGraph g = path_graph(3);
    EXPECT_THROW(out_neighborhood(g, 3, 1), ArgumentError);
    EXPECT_THROW(out_neighborhood(g, 0, 0), ArgumentError);
}

TEST(OutNeighborhood, MatchesReverseBfsOnRandomDags) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CascadeGraph g = random_dag(30, 0.1, seed);
        for (NodeId v = 0; v < 30; ++v)
            for (std::size_t d = 1; d <= 4; ++d)
                ASSERT_EQ(as_set(out_neighborhood(g, v, d)), reverse_bfs_oracle(g, v, d))
                    << "seed " << seed << " v " << v << " d " << d;
    }
}

TEST(OutNeighborhood, ContainsSelfAndIsMonotoneInRadius) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const CascadeGraph g = random_digraph(25, 0.08, seed);
        for (NodeId v = 0; v < 25; ++v) {
            std::set<NodeId> prev;
            for (std::size_t d = 1; d <= 5; ++d) {
                const auto cur = as_set(out_neighborhood(g, v, d));
                EXPECT_TRUE(cur.count(v));
                EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
                prev = cur;
            }
        }
    }
}

TEST(DownstreamCoverage, IsTransposeOfOutNeighborhood) {
    const CascadeGraph g = random_digraph(20, 0.1, 5);
    for (std::size_t d = 1; d <= 3; ++d)
        for (NodeId u = 0; u < 20; ++u)
            for (NodeId v : downstream_coverage(g, u, d)) {
                const auto cover = out_neighborhood(g, v, d);
                EXPECT_TRUE(std::binary_search(cover.begin(), cover.end(), u));
            }
}

TEST(ShortestPath, DirectedChain) {
    const CascadeGraph g = path_graph(3);
    EXPECT_EQ(shortest_path_len(g, 1, 1), 0u);
    EXPECT_EQ(shortest_path_len(g, 0, 2), 2u);
    EXPECT_FALSE(shortest_path_len(g, 2, 0).has_value());
    EXPECT_THROW(shortest_path_len(g, 0, 5), ArgumentError);
}

TEST(LargestComponent, TrivialCases) {
    const CascadeGraph g = path_graph(6);
    EXPECT_EQ(largest_component_size(g, {}), 6u);
    const std::vector<NodeId> all{0, 1, 2, 3, 4, 5};
    EXPECT_EQ(largest_component_size(g, all), 0u);
    const std::vector<NodeId> mid{2};
    EXPECT_EQ(largest_component_size(g, mid), 3u);
}

TEST(LargestComponent, MatchesUnionFind) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const CascadeGraph g = random_digraph(40, 0.04, seed);
        std::mt19937_64 rng(seed + 1000);
        std::vector<NodeId> nodes(40);
        std::iota(nodes.begin(), nodes.end(), NodeId{0});
        rng::shuffle(nodes, rng);
        nodes.resize(10);
        EXPECT_EQ(largest_component_size(g, nodes), component_oracle(g, {nodes.begin(), nodes.end()}))
            << "seed " << seed;
    }
}

TEST(SynthCascade, TreeWithoutExtraEdges) {
    const CascadeGraph g = synth_cascade(100, 0.0, 0.0, 7);
    EXPECT_EQ(g.num_edges(), 99u);
    std::size_t roots = 0;
    for (NodeId v = 0; v < 100; ++v) roots += g.in_degree(v) == 0;
    EXPECT_EQ(roots, 1u);
    EXPECT_EQ(g.source(), 0u);
    EXPECT_EQ(largest_component_size(g, {}), 100u);
}

TEST(SynthCascade, Deterministic) {
    const CascadeGraph a = synth_cascade(200, 0.1, 0.5, 11), b = synth_cascade(200, 0.1, 0.5, 11);
    EXPECT_EQ(a.edges(), b.edges());
    EXPECT_EQ(a.users(), b.users());
    EXPECT_NE(a.edges(), synth_cascade(200, 0.1, 0.5, 12).edges());
}

TEST(SynthCascade, HeavyTailedOutDegree) {
    const CascadeGraph g = synth_cascade(500, 0.1, 0.5, 1);
    std::vector<std::size_t> deg;
    for (NodeId v = 0; v < 500; ++v) deg.push_back(g.out_degree(v));
    std::sort(deg.begin(), deg.end());
    const double median = 0.5 * static_cast<double>(deg[249] + deg[250]);
    EXPECT_GE(static_cast<double>(deg.back()), 5.0 * std::max(median, 1.0));
}

TEST(SynthCascade, ExtraEdgesKeepSingleRoot) {
    const CascadeGraph g = synth_cascade(300, 0.3, 0.5, 4);
    EXPECT_EQ(g.num_edges(), 299u + 90u);
    for (NodeId v = 1; v < 300; ++v) EXPECT_GT(g.in_degree(v), 0u);
}

TEST(SynthCascade, InvalidParameters) {
    EXPECT_THROW(synth_cascade(9, 0.1, 0.5, 0), ArgumentError);
    EXPECT_THROW(synth_cascade(50, -0.1, 0.5, 0), ArgumentError);
    EXPECT_THROW(synth_cascade(50, 0.1, -1.0, 0), ArgumentError);
}
