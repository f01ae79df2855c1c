#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <vector>

#include "leap/anchors.hpp"
#include "leap/graph.hpp"
#include "leap/matrix.hpp"

namespace leap {

/// Exact unweighted hop distances from `source` to each target; -1 when
/// unreachable. Edge and node types are ignored.
inline std::vector<int> bfs_distances(const Graph& g, NodeId source,
                                      std::span<const NodeId> targets) {
    const auto dist = [&] {
        std::vector<int> d(g.num_nodes(), -1);
        std::deque<NodeId> queue{source};
        d[source] = 0;
        while (!queue.empty()) {
            const NodeId u = queue.front();
            queue.pop_front();
            for (NodeId v : g.neighbors(u)) {
                if (d[v] < 0) {
                    d[v] = d[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        return d;
    }();
    std::vector<int> out;
    out.reserve(targets.size());
    for (NodeId t : targets) {
        if (t < 0 || static_cast<std::size_t>(t) >= g.num_nodes())
            throw std::out_of_range("bfs_distances: target out of range");
        out.push_back(dist[t]);
    }
    return out;
}

/// Ground-truth closeness of each held-out node to every anchor:
/// w[i][j] = 1 / dist(node_i, anchor_j), 0 when unreachable. Computed on the
/// full graph, before the held-out nodes are removed.
struct ClosenessLabels {
    std::vector<NodeId> nodes; // row order
    Matrix w;                  // |nodes| x k, entries in [0, 1]
};

inline ClosenessLabels closeness_labels(const Graph& g, std::span<const NodeId> inductive,
                                        const AnchorSet& anchors) {
    std::vector<char> held(g.num_nodes(), 0);
    for (NodeId i : inductive) {
        if (i < 0 || static_cast<std::size_t>(i) >= g.num_nodes())
            throw std::out_of_range("closeness_labels: node out of range");
        held[i] = 1;
    }
    for (NodeId a : anchors.ids)
        if (held[a])
            throw std::invalid_argument("closeness_labels: anchor " + std::to_string(a) +
                                        " is also a held-out node");

    ClosenessLabels out;
    out.nodes.assign(inductive.begin(), inductive.end());
    out.w = Matrix::Zero(static_cast<Eigen::Index>(inductive.size()),
                         static_cast<Eigen::Index>(anchors.size()));
    // One BFS per anchor covers the whole column (distances are symmetric).
    for (std::size_t j = 0; j < anchors.size(); ++j) {
        const auto d = bfs_distances(g, anchors.ids[j], inductive);
        for (std::size_t i = 0; i < inductive.size(); ++i)
            if (d[i] > 0) out.w(i, j) = 1.0 / static_cast<double>(d[i]);
    }
    return out;
}

/// Cache key for a label matrix: FNV-1a over the graph's canonical edge
/// list, the anchor ids in order, and the held-out ids in order.
inline std::uint64_t labels_cache_key(const Graph& g, std::span<const NodeId> inductive,
                                      const AnchorSet& anchors) {
    std::uint64_t h = 1469598103934665603ULL;
    const auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xff;
            h *= 1099511628211ULL;
        }
    };
    mix(g.num_nodes());
    for (const auto& [u, v] : g.edges()) {
        mix(static_cast<std::uint64_t>(u));
        mix(static_cast<std::uint64_t>(v));
    }
    mix(0xa11c); // section separator
    for (NodeId a : anchors.ids) mix(static_cast<std::uint64_t>(a));
    mix(0x1d5);
    for (NodeId i : inductive) mix(static_cast<std::uint64_t>(i));
    return h;
}

} // namespace leap
