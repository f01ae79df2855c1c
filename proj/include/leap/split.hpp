#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "leap/graph.hpp"
#include "leap/rng.hpp"

namespace leap {

enum class SplitMode { InductiveNode, TransductiveEdge };

/// Deterministic description of a train/valid/test partition. The seed fully
/// determines the partition; running make_split twice yields identical output.
struct SplitSpec {
    SplitMode mode = SplitMode::InductiveNode;
    double train_frac = 0.8;
    double valid_frac = 0.1;
    double test_frac = 0.1;
    std::uint64_t seed = 1;
    /// Restricts which nodes may become newcomers in inductive mode.
    std::optional<int> inductive_node_type;

    void validate() const {
        if (train_frac <= 0 || valid_frac <= 0 || test_frac <= 0)
            throw std::invalid_argument("SplitSpec: fractions must be positive");
        if (std::abs(train_frac + valid_frac + test_frac - 1.0) > 1e-9)
            throw std::invalid_argument("SplitSpec: fractions must sum to 1");
    }
};

struct Split {
    SplitMode mode = SplitMode::InductiveNode;
    Graph train_graph;
    /// Original id -> train_graph id; -1 for removed newcomers (identity in
    /// transductive mode).
    std::vector<NodeId> remap;
    /// Newcomer node ids in the original graph (inductive mode only).
    std::vector<NodeId> valid_nodes, test_nodes;
    /// Positive evaluation pairs in original ids. Inductive: (newcomer, train
    /// node). Transductive: held-out edges.
    std::vector<std::pair<NodeId, NodeId>> valid_pairs, test_pairs;
};

namespace detail {

inline const std::uint64_t kSplitStream = 11;

} // namespace detail

/// Partitions the graph per spec. Inductive mode removes the valid/test nodes
/// from the training graph entirely: no train edge touches a newcomer, and a
/// newcomer's held-out edges to surviving train nodes become its positives.
/// Transductive mode keeps all nodes and partitions the edges.
inline Split make_split(const Graph& g, const SplitSpec& spec) {
    spec.validate();
    if (g.num_nodes() == 0) throw std::invalid_argument("make_split: empty graph");
    Rng rng(derive_seed(spec.seed, detail::kSplitStream));

    Split out;
    out.mode = spec.mode;
    if (spec.mode == SplitMode::InductiveNode) {
        std::vector<NodeId> eligible;
        for (std::size_t u = 0; u < g.num_nodes(); ++u) {
            if (!spec.inductive_node_type ||
                g.node_type(static_cast<NodeId>(u)) == *spec.inductive_node_type)
                eligible.push_back(static_cast<NodeId>(u));
        }
        const std::size_t n_test =
            static_cast<std::size_t>(spec.test_frac * static_cast<double>(eligible.size()));
        const std::size_t n_valid =
            static_cast<std::size_t>(spec.valid_frac * static_cast<double>(eligible.size()));
        if (n_test == 0) throw std::invalid_argument("make_split: test fraction yields no test nodes");
        if (n_test + n_valid >= eligible.size())
            throw std::invalid_argument("make_split: no train nodes left");
        rng.shuffle(eligible);
        out.test_nodes.assign(eligible.begin(), eligible.begin() + n_test);
        out.valid_nodes.assign(eligible.begin() + n_test, eligible.begin() + n_test + n_valid);
        std::sort(out.test_nodes.begin(), out.test_nodes.end());
        std::sort(out.valid_nodes.begin(), out.valid_nodes.end());

        std::vector<char> is_newcomer(g.num_nodes(), 0);
        for (NodeId u : out.test_nodes) is_newcomer[u] = 1;
        for (NodeId u : out.valid_nodes) is_newcomer[u] = 2;

        // Held-out edges between a newcomer and a surviving node become that
        // newcomer's positives; newcomer-newcomer edges are not evaluated.
        for (const auto& [u, v] : g.edges()) {
            const char cu = is_newcomer[u], cv = is_newcomer[v];
            if (cu && cv) continue;
            if (cu == 1 || cv == 1) out.test_pairs.emplace_back(cu ? u : v, cu ? v : u);
            else if (cu == 2 || cv == 2) out.valid_pairs.emplace_back(cu ? u : v, cu ? v : u);
        }

        std::vector<NodeId> drop;
        drop.reserve(out.test_nodes.size() + out.valid_nodes.size());
        drop.insert(drop.end(), out.test_nodes.begin(), out.test_nodes.end());
        drop.insert(drop.end(), out.valid_nodes.begin(), out.valid_nodes.end());
        auto removed = remove_nodes(g, drop);
        out.train_graph = std::move(removed.graph);
        out.remap = std::move(removed.remap);
    } else {
        const std::size_t m = g.num_edges();
        if (m == 0) throw std::invalid_argument("make_split: transductive split needs edges");
        const std::size_t n_test = static_cast<std::size_t>(spec.test_frac * static_cast<double>(m));
        const std::size_t n_valid = static_cast<std::size_t>(spec.valid_frac * static_cast<double>(m));
        if (n_test == 0) throw std::invalid_argument("make_split: test fraction yields no test edges");
        std::vector<std::size_t> order(m);
        for (std::size_t i = 0; i < m; ++i) order[i] = i;
        rng.shuffle(order);

        std::vector<EdgeInput> train_edges;
        train_edges.reserve(m - n_test - n_valid);
        for (std::size_t i = 0; i < m; ++i) {
            const auto [u, v] = g.edges()[order[i]];
            if (i < n_test) out.test_pairs.emplace_back(u, v);
            else if (i < n_test + n_valid) out.valid_pairs.emplace_back(u, v);
            else train_edges.push_back({u, v, g.edge_types()[order[i]]});
        }
        out.train_graph = build_graph(train_edges, g.node_types(), g.features(),
                                      g.node_type_names(), g.edge_type_names());
        out.remap.resize(g.num_nodes());
        for (std::size_t u = 0; u < g.num_nodes(); ++u) out.remap[u] = static_cast<NodeId>(u);
    }
    return out;
}

} // namespace leap
