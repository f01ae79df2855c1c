#include <catch2/catch_amalgamated.hpp>

#include "leap/closeness.hpp"
#include "oracles.hpp"

using namespace leap;

namespace {

Graph random_graph(std::uint64_t seed, std::size_t n, double p) {
    Rng rng(seed);
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if (rng.next_real() < p) edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    return build_graph(edges, n);
}

} // namespace

TEST_CASE("bfs hop counts", "[closeness]") {
    auto path = build_graph({{0, 1}, {1, 2}}, 3);
    std::vector<NodeId> targets{1, 2};
    CHECK(bfs_distances(path, 0, targets) == std::vector<int>{1, 2});

    auto split = build_graph({{0, 1}}, 3);
    std::vector<NodeId> t2{2};
    CHECK(bfs_distances(split, 0, t2) == std::vector<int>{-1});
}

TEST_CASE("bfs matches floyd-warshall on random graphs", "[closeness]") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto g = random_graph(seed, 20, 0.12);
        auto all = oracle::floyd_warshall(g);
        std::vector<NodeId> targets(g.num_nodes());
        std::iota(targets.begin(), targets.end(), 0);
        for (std::size_t s = 0; s < g.num_nodes(); ++s) {
            auto d = bfs_distances(g, static_cast<NodeId>(s), targets);
            for (std::size_t t = 0; t < g.num_nodes(); ++t) CHECK(d[t] == all[s][t]);
        }
    }
}

TEST_CASE("closeness is reciprocal hop distance", "[closeness]") {
    // 0-1-2-3 path; anchors {1, 2, 3}, held-out {0}.
    auto g = build_graph({{0, 1}, {1, 2}, {2, 3}}, 4);
    AnchorSet anchors;
    anchors.ids = {1, 2, 3};
    std::vector<NodeId> held{0};
    auto labels = closeness_labels(g, held, anchors);
    CHECK(labels.w(0, 0) == 1.0);       // dist 1
    CHECK(labels.w(0, 1) == 0.5);       // dist 2
    CHECK(labels.w(0, 2) == 1.0 / 3.0); // dist 3
}

TEST_CASE("unreachable anchor gives zero closeness", "[closeness]") {
    auto g = build_graph({{0, 1}}, 3);
    AnchorSet anchors;
    anchors.ids = {2};
    std::vector<NodeId> held{0};
    auto labels = closeness_labels(g, held, anchors);
    CHECK(labels.w(0, 0) == 0.0);
}

TEST_CASE("closeness bounds and monotonicity", "[closeness]") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        auto g = random_graph(seed, 18, 0.15);
        AnchorSet anchors;
        anchors.ids = {0, 1, 2};
        std::vector<NodeId> held{10, 11, 12};
        auto labels = closeness_labels(g, held, anchors);
        auto fw = oracle::floyd_warshall(g);
        for (std::size_t i = 0; i < held.size(); ++i)
            for (std::size_t j = 0; j < anchors.size(); ++j) {
                const double w = labels.w(i, j);
                CHECK(w >= 0.0);
                CHECK(w <= 1.0);
                const int d = fw[held[i]][anchors.ids[j]];
                if (d < 0) CHECK(w == 0.0);
                else {
                    CHECK(w == 1.0 / d);
                    if (d == 1) CHECK(w == 1.0);
                }
            }
    }
}

TEST_CASE("labels permute with anchor order", "[closeness]") {
    auto g = random_graph(3, 15, 0.2);
    std::vector<NodeId> held{5, 6};
    AnchorSet a1, a2;
    a1.ids = {0, 1, 2};
    a2.ids = {2, 0, 1};
    auto l1 = closeness_labels(g, held, a1);
    auto l2 = closeness_labels(g, held, a2);
    for (std::size_t i = 0; i < held.size(); ++i) {
        CHECK(l1.w(i, 0) == l2.w(i, 1));
        CHECK(l1.w(i, 1) == l2.w(i, 2));
        CHECK(l1.w(i, 2) == l2.w(i, 0));
    }
}

TEST_CASE("labels depend only on the graph", "[closeness]") {
    // Recomputing on an identical rebuilt graph reproduces identical labels.
    auto g = random_graph(4, 16, 0.2);
    AnchorSet anchors;
    anchors.ids = {0, 3};
    std::vector<NodeId> held{8, 9};
    auto l1 = closeness_labels(g, held, anchors);
    std::vector<std::pair<NodeId, NodeId>> edges(g.edges());
    auto rebuilt = build_graph(edges, g.num_nodes());
    auto l2 = closeness_labels(rebuilt, held, anchors);
    CHECK(l1.w == l2.w);
}

TEST_CASE("anchor overlapping held-out set is rejected", "[closeness]") {
    auto g = build_graph({{0, 1}, {1, 2}}, 3);
    AnchorSet anchors;
    anchors.ids = {0};
    std::vector<NodeId> held{0};
    CHECK_THROWS_AS(closeness_labels(g, held, anchors), std::invalid_argument);
}
