#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chainsift/rng.hpp"
#include "chainsift/txgraph.hpp"
#include "oracles.hpp"

using namespace chainsift;

namespace {

std::vector<TransferRecord> edges_to_transfers(
    const std::vector<std::pair<std::string, std::string>>& edges) {
    std::vector<TransferRecord> ts;
    std::int64_t t = 1;
    for (const auto& [src, dst] : edges) ts.push_back({t++, src, dst, 100});
    return ts;
}

double score_of(const NodeScores& s, const std::string& addr) { return s.score.at(addr); }

}  // namespace

TEST_CASE("empty and tiny graph construction") {
    CHECK(build_graph({}).node_count() == 0);

    auto g1 = build_graph(edges_to_transfers({{"a", "b"}}));
    CHECK(g1.node_count() == 2);
    CHECK(g1.edge_count() == 1);

    auto g2 = build_graph(edges_to_transfers({{"a", "b"}, {"a", "b"}}));
    CHECK(g2.node_count() == 2);
    CHECK(g2.edge_count() == 2);  // parallel edges preserved
    CHECK(g2.neighbors()[0].size() == 1);  // but collapsed for adjacency
}

TEST_CASE("self loops are kept as edges, excluded from adjacency") {
    auto g = build_graph(edges_to_transfers({{"a", "a"}, {"a", "b"}}));
    CHECK(g.edge_count() == 2);
    CHECK(g.neighbors()[*g.node_id("a")].size() == 1);
}

TEST_CASE("degree centrality on star, parallel pair, and path") {
    auto star = build_graph(edges_to_transfers({{"c", "l1"}, {"c", "l2"}, {"c", "l3"}}));
    auto ds = degree_centrality(star);
    CHECK(score_of(ds, "c") == doctest::Approx(1.0));
    CHECK(score_of(ds, "l1") == doctest::Approx(1.0 / 3.0));

    auto parallel = build_graph(edges_to_transfers({{"a", "b"}, {"a", "b"}}));
    auto dp = degree_centrality(parallel);
    CHECK(score_of(dp, "a") == doctest::Approx(1.0));
    CHECK(score_of(dp, "b") == doctest::Approx(1.0));

    auto path = build_graph(edges_to_transfers({{"a", "b"}, {"b", "c"}}));
    auto dpath = degree_centrality(path);
    CHECK(score_of(dpath, "a") == doctest::Approx(0.5));
    CHECK(score_of(dpath, "b") == doctest::Approx(1.0));
    CHECK(score_of(dpath, "c") == doctest::Approx(0.5));
}

TEST_CASE("degree centrality rejects singleton graphs") {
    auto g = build_graph(edges_to_transfers({{"a", "a"}}));
    CHECK_THROWS_AS(degree_centrality(g), std::invalid_argument);
}

TEST_CASE("closeness on path, K3, and disconnected edges") {
    auto path = build_graph(edges_to_transfers({{"a", "b"}, {"b", "c"}}));
    auto cs = closeness_centrality(path);
    CHECK(score_of(cs, "b") == doctest::Approx(1.0));
    CHECK(score_of(cs, "a") == doctest::Approx(2.0 / 3.0));

    auto k3 = build_graph(edges_to_transfers({{"a", "b"}, {"b", "c"}, {"c", "a"}}));
    for (const auto& [addr, score] : closeness_centrality(k3).score)
        CHECK(score == doctest::Approx(1.0));

    auto two = build_graph(edges_to_transfers({{"a", "b"}, {"c", "d"}}));
    for (const auto& [addr, score] : closeness_centrality(two).score)
        CHECK(score == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("betweenness on triangle, path, and star") {
    auto tri = build_graph(edges_to_transfers({{"a", "b"}, {"b", "c"}, {"c", "a"}}));
    for (const auto& [addr, score] : betweenness_centrality(tri).score)
        CHECK(score == doctest::Approx(0.0));

    auto path = build_graph(edges_to_transfers({{"a", "b"}, {"b", "c"}}));
    auto bs = betweenness_centrality(path);
    CHECK(score_of(bs, "b") == doctest::Approx(1.0));
    CHECK(score_of(bs, "a") == doctest::Approx(0.0));

    auto star = build_graph(edges_to_transfers({{"c", "l1"}, {"c", "l2"}, {"c", "l3"}}));
    CHECK(score_of(betweenness_centrality(star), "c") == doctest::Approx(3.0));
}

namespace {

struct RandomGraph {
    std::vector<TransferRecord> transfers;
    std::vector<std::vector<bool>> adj;  // undirected, collapsed
    std::vector<std::string> names;
};

RandomGraph random_graph(Rng& rng, std::size_t max_nodes) {
    RandomGraph g;
    const std::size_t n = 2 + rng.next_below(max_nodes - 1);
    g.adj.assign(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) g.names.push_back("n" + std::to_string(i));
    std::int64_t t = 1;
    const std::size_t m = rng.next_below(n * n);
    for (std::size_t e = 0; e < m; ++e) {
        const auto a = rng.next_below(n);
        const auto b = rng.next_below(n);
        g.transfers.push_back({t++, g.names[a], g.names[b],
                               1 + static_cast<std::int64_t>(rng.next_below(1000))});
        if (a != b) {
            g.adj[a][b] = true;
            g.adj[b][a] = true;
        }
    }
    // sprinkle in a few guaranteed links; always at least one so the built
    // graph has >= 2 nodes
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (i > 0 && rng.next_below(3) == 0) continue;
        g.transfers.push_back({t++, g.names[i], g.names[i + 1], 1});
        g.adj[i][i + 1] = true;
        g.adj[i + 1][i] = true;
    }
    return g;
}

}  // namespace

TEST_CASE("centralities match brute-force enumeration on 200 random graphs") {
    Rng rng(404);
    for (int trial = 0; trial < 200; ++trial) {
        auto rg = random_graph(rng, 8);
        auto graph = build_graph(rg.transfers);
        const std::size_t n = graph.node_count();

        // Rebuild the oracle adjacency in the graph's node order.
        std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
        for (const auto& e : graph.edges()) {
            if (e.src == e.dst) continue;
            adj[e.src][e.dst] = true;
            adj[e.dst][e.src] = true;
        }

        oracle::BetweennessEnumerator oracle_bc(adj);
        const auto expect_bc = oracle_bc.scores();
        const auto expect_cl = oracle::closeness_from_distances(oracle_bc.dist());

        auto got_bc = betweenness_centrality(graph);
        auto got_cl = closeness_centrality(graph);
        auto got_dg = degree_centrality(graph);
        for (std::size_t v = 0; v < n; ++v) {
            const auto& addr = graph.addresses()[v];
            CHECK(std::abs(got_bc.score.at(addr) - expect_bc[v]) <= 1e-9);
            CHECK(std::abs(got_cl.score.at(addr) - expect_cl[v]) <= 1e-9);
            std::size_t nbrs = 0;
            for (std::size_t u = 0; u < n; ++u) nbrs += adj[v][u] ? 1 : 0;
            CHECK(got_dg.score.at(addr) ==
                  doctest::Approx(static_cast<double>(nbrs) / static_cast<double>(n - 1)));
        }

        // bounds
        for (const auto& [addr, s] : got_cl.score) {
            CHECK(s >= 0.0);
            CHECK(s <= 1.0 + 1e-12);
        }
        const double bc_cap = static_cast<double>((n - 1) * (n - 2)) / 2.0;
        for (const auto& [addr, s] : got_bc.score) {
            CHECK(s >= -1e-12);
            CHECK(s <= bc_cap + 1e-9);
        }
    }
}

TEST_CASE("parallel kernels equal serial references") {
    Rng rng(77);
    for (int trial = 0; trial < 8; ++trial) {
        // sizes past 64 nodes exercise the multi-block betweenness reduction
        auto rg = random_graph(rng, trial < 4 ? 40 : 200);
        auto graph = build_graph(rg.transfers);
        auto cs = closeness_centrality_serial(graph);
        auto cp1 = closeness_centrality(graph, 1);
        auto cp8 = closeness_centrality(graph, 8);
        auto bs = betweenness_centrality_serial(graph);
        auto bp1 = betweenness_centrality(graph, 1);
        auto bp8 = betweenness_centrality(graph, 8);
        for (const auto& [addr, s] : cs.score) {
            CHECK(cp1.score.at(addr) == s);  // closeness slots are independent
            CHECK(cp8.score.at(addr) == cp1.score.at(addr));
        }
        for (const auto& [addr, s] : bs.score) {
            CHECK(std::abs(bp1.score.at(addr) - s) < 1e-12 * std::max(1.0, std::abs(s)));
            CHECK(bp8.score.at(addr) == bp1.score.at(addr));  // fixed block reduction
        }
    }
}

TEST_CASE("scores are invariant under node relabeling") {
    Rng rng(99);
    auto rg = random_graph(rng, 8);
    auto g1 = build_graph(rg.transfers);

    auto relabeled = rg.transfers;
    auto rename = [](const std::string& s) { return "x_" + s + "_y"; };
    for (auto& t : relabeled) {
        t.src = rename(t.src);
        t.dst = rename(t.dst);
    }
    auto g2 = build_graph(relabeled);

    for (auto kind : {0, 1, 2}) {
        auto s1 = kind == 0   ? degree_centrality(g1)
                  : kind == 1 ? closeness_centrality(g1)
                              : betweenness_centrality(g1);
        auto s2 = kind == 0   ? degree_centrality(g2)
                  : kind == 1 ? closeness_centrality(g2)
                              : betweenness_centrality(g2);
        for (const auto& [addr, score] : s1.score)
            CHECK(s2.score.at(rename(addr)) == doctest::Approx(score).epsilon(1e-14));
    }
}

TEST_CASE("adding a parallel edge changes no centrality") {
    auto base = edges_to_transfers({{"a", "b"}, {"b", "c"}, {"c", "d"}, {"b", "d"}});
    auto more = base;
    more.push_back({99, "b", "c", 5});  // duplicate of an existing link
    auto g1 = build_graph(base);
    auto g2 = build_graph(more);
    for (const auto& [addr, s] : betweenness_centrality(g1).score)
        CHECK(betweenness_centrality(g2).score.at(addr) == doctest::Approx(s).epsilon(1e-14));
    for (const auto& [addr, s] : closeness_centrality(g1).score)
        CHECK(closeness_centrality(g2).score.at(addr) == doctest::Approx(s).epsilon(1e-14));
    for (const auto& [addr, s] : degree_centrality(g1).score)
        CHECK(degree_centrality(g2).score.at(addr) == doctest::Approx(s).epsilon(1e-14));
}

TEST_CASE("scores csv is ordered by address") {
    auto g = build_graph(edges_to_transfers({{"b", "a"}, {"a", "c"}}));
    const auto csv = scores_csv(degree_centrality(g));
    CHECK(csv.rfind("address,score\n", 0) == 0);
    CHECK(csv.find("a,") < csv.find("b,"));
    CHECK(csv.find("b,") < csv.find("c,"));
}
