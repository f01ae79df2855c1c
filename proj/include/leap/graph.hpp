#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "leap/matrix.hpp"

namespace leap {

using NodeId = std::int32_t;

struct EdgeInput {
    NodeId u;
    NodeId v;
    int type = 0;
};

/// Immutable undirected multigraph-free graph with typed nodes/edges and a
/// dense node feature matrix. Each undirected edge is stored once in the
/// canonical edge list (u < v) and twice in the CSR adjacency, so neighbor
/// queries are symmetric.
///
/// Safe to share across threads once built.
class Graph {
public:
    Graph() = default;

    std::size_t num_nodes() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    std::size_t num_edges() const { return edges_.size(); }
    std::size_t num_node_types() const { return node_type_names_.size(); }
    std::size_t num_edge_types() const { return edge_type_names_.size(); }

    /// |node types| + |edge types| > 2.
    bool is_heterogeneous() const { return num_node_types() + num_edge_types() > 2; }

    /// Sorted, duplicate-free neighbor list of u.
    std::span<const NodeId> neighbors(NodeId u) const {
        check_node(u);
        return {adj_.data() + offsets_[u], adj_.data() + offsets_[u + 1]};
    }

    /// Edge types aligned with neighbors(u).
    std::span<const int> neighbor_edge_types(NodeId u) const {
        check_node(u);
        return {adj_type_.data() + offsets_[u], adj_type_.data() + offsets_[u + 1]};
    }

    std::size_t degree(NodeId u) const {
        check_node(u);
        return offsets_[u + 1] - offsets_[u];
    }

    bool has_edge(NodeId u, NodeId v) const {
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= num_nodes() ||
            static_cast<std::size_t>(v) >= num_nodes())
            return false;
        const auto nb = neighbors(u);
        return std::binary_search(nb.begin(), nb.end(), v);
    }

    /// Canonical edge list, sorted, u < v.
    const std::vector<std::pair<NodeId, NodeId>>& edges() const { return edges_; }
    const std::vector<int>& edge_types() const { return edge_types_; }

    int node_type(NodeId u) const {
        check_node(u);
        return node_types_[u];
    }
    const std::vector<int>& node_types() const { return node_types_; }

    const Matrix& features() const { return features_; }
    std::size_t feature_dim() const { return static_cast<std::size_t>(features_.cols()); }

    const std::vector<std::string>& node_type_names() const { return node_type_names_; }
    const std::vector<std::string>& edge_type_names() const { return edge_type_names_; }

    /// Duplicate input edges silently dropped at build time, tallied here.
    std::size_t duplicate_edges_dropped() const { return duplicates_dropped_; }

    friend Graph build_graph(const std::vector<EdgeInput>& edges, std::vector<int> node_types,
                             Matrix features, std::vector<std::string> node_type_names,
                             std::vector<std::string> edge_type_names);

private:
    void check_node(NodeId u) const {
        if (u < 0 || static_cast<std::size_t>(u) >= num_nodes())
            throw std::out_of_range("Graph: node id " + std::to_string(u) + " out of range");
    }

    std::vector<std::size_t> offsets_;               // N+1
    std::vector<NodeId> adj_;                        // sorted per row
    std::vector<int> adj_type_;                      // edge type per half-edge
    std::vector<std::pair<NodeId, NodeId>> edges_;   // u < v, sorted
    std::vector<int> edge_types_;                    // per canonical edge
    std::vector<int> node_types_;
    Matrix features_;
    std::vector<std::string> node_type_names_;
    std::vector<std::string> edge_type_names_;
    std::size_t duplicates_dropped_ = 0;
};

/// Builds the canonical graph: edges deduplicated and symmetrized, adjacency
/// sorted. Self-loops are rejected; duplicate edges are dropped and tallied.
/// `features` must have one row per node and be fully finite.
inline Graph build_graph(const std::vector<EdgeInput>& edges, std::vector<int> node_types,
                         Matrix features, std::vector<std::string> node_type_names = {},
                         std::vector<std::string> edge_type_names = {}) {
    const std::size_t n = node_types.size();
    if (n == 0) throw std::invalid_argument("build_graph: graph must have at least one node");
    if (static_cast<std::size_t>(features.rows()) != n)
        throw std::invalid_argument("build_graph: feature rows (" + std::to_string(features.rows()) +
                                    ") != node count (" + std::to_string(n) + ")");
    if (!features.allFinite())
        throw std::invalid_argument("build_graph: features contain non-finite values");

    int max_node_type = -1;
    for (int t : node_types) {
        if (t < 0) throw std::invalid_argument("build_graph: negative node type");
        max_node_type = std::max(max_node_type, t);
    }
    if (node_type_names.empty()) {
        for (int t = 0; t <= std::max(max_node_type, 0); ++t)
            node_type_names.push_back("ntype" + std::to_string(t));
    }
    if (static_cast<std::size_t>(max_node_type) >= node_type_names.size())
        throw std::invalid_argument("build_graph: node type id exceeds type name table");

    // Canonicalize to u < v, validate, then sort + dedup.
    std::vector<std::tuple<NodeId, NodeId, int>> canon;
    canon.reserve(edges.size());
    int max_edge_type = -1;
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= n ||
            static_cast<std::size_t>(e.v) >= n)
            throw std::invalid_argument("build_graph: edge endpoint out of range: (" +
                                        std::to_string(e.u) + "," + std::to_string(e.v) + ")");
        if (e.u == e.v)
            throw std::invalid_argument("build_graph: self-loop at node " + std::to_string(e.u));
        if (e.type < 0) throw std::invalid_argument("build_graph: negative edge type");
        max_edge_type = std::max(max_edge_type, e.type);
        canon.emplace_back(std::min(e.u, e.v), std::max(e.u, e.v), e.type);
    }
    if (edge_type_names.empty()) {
        for (int t = 0; t <= std::max(max_edge_type, 0); ++t)
            edge_type_names.push_back("etype" + std::to_string(t));
    }
    if (max_edge_type >= 0 && static_cast<std::size_t>(max_edge_type) >= edge_type_names.size())
        throw std::invalid_argument("build_graph: edge type id exceeds type name table");

    std::sort(canon.begin(), canon.end());
    Graph g;
    for (const auto& [u, v, t] : canon) {
        if (!g.edges_.empty() && g.edges_.back() == std::make_pair(u, v)) {
            ++g.duplicates_dropped_; // first occurrence wins, including its type
            continue;
        }
        g.edges_.emplace_back(u, v);
        g.edge_types_.push_back(t);
    }

    // CSR over both directions.
    std::vector<std::size_t> deg(n, 0);
    for (const auto& [u, v] : g.edges_) {
        ++deg[u];
        ++deg[v];
    }
    g.offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.offsets_[i + 1] = g.offsets_[i] + deg[i];
    g.adj_.resize(g.offsets_[n]);
    g.adj_type_.resize(g.offsets_[n]);
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (std::size_t e = 0; e < g.edges_.size(); ++e) {
        const auto [u, v] = g.edges_[e];
        const int t = g.edge_types_[e];
        g.adj_[cursor[u]] = v;
        g.adj_type_[cursor[u]++] = t;
        g.adj_[cursor[v]] = u;
        g.adj_type_[cursor[v]++] = t;
    }
    // Edge list is sorted, so each CSR row came out sorted as well for the
    // "v" side only; sort rows to restore the invariant everywhere.
    for (std::size_t u = 0; u < n; ++u) {
        const std::size_t b = g.offsets_[u], e = g.offsets_[u + 1];
        std::vector<std::pair<NodeId, int>> row;
        row.reserve(e - b);
        for (std::size_t i = b; i < e; ++i) row.emplace_back(g.adj_[i], g.adj_type_[i]);
        std::sort(row.begin(), row.end());
        for (std::size_t i = b; i < e; ++i) {
            g.adj_[i] = row[i - b].first;
            g.adj_type_[i] = row[i - b].second;
        }
    }

    g.node_types_ = std::move(node_types);
    g.features_ = std::move(features);
    g.node_type_names_ = std::move(node_type_names);
    g.edge_type_names_ = std::move(edge_type_names);
    return g;
}

/// Convenience builder for untyped graphs with zero-width features.
inline Graph build_graph(const std::vector<std::pair<NodeId, NodeId>>& edges, std::size_t num_nodes,
                         Matrix features = Matrix()) {
    std::vector<EdgeInput> in;
    in.reserve(edges.size());
    for (auto [u, v] : edges) in.push_back({u, v, 0});
    if (features.rows() == 0) features = Matrix::Zero(static_cast<Eigen::Index>(num_nodes), 0);
    return build_graph(in, std::vector<int>(num_nodes, 0), std::move(features));
}

struct RemovalResult {
    Graph graph;
    std::vector<NodeId> remap; // old id -> new id, -1 when dropped
};

/// New graph without `drop` and their incident edges; surviving ids are
/// compacted. The remap keeps labels computed before removal addressable.
inline RemovalResult remove_nodes(const Graph& g, const std::vector<NodeId>& drop) {
    const std::size_t n = g.num_nodes();
    std::vector<char> dropped(n, 0);
    for (NodeId u : drop) {
        if (u < 0 || static_cast<std::size_t>(u) >= n)
            throw std::invalid_argument("remove_nodes: id out of range");
        dropped[u] = 1;
    }
    std::vector<NodeId> remap(n, -1);
    NodeId next = 0;
    for (std::size_t u = 0; u < n; ++u)
        if (!dropped[u]) remap[u] = next++;
    if (next == 0) throw std::invalid_argument("remove_nodes: cannot drop every node");

    std::vector<EdgeInput> kept;
    kept.reserve(g.num_edges());
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto [u, v] = g.edges()[e];
        if (!dropped[u] && !dropped[v]) kept.push_back({remap[u], remap[v], g.edge_types()[e]});
    }
    std::vector<int> node_types(next);
    Matrix features(next, g.features().cols());
    for (std::size_t u = 0; u < n; ++u) {
        if (remap[u] < 0) continue;
        node_types[remap[u]] = g.node_type(static_cast<NodeId>(u));
        features.row(remap[u]) = g.features().row(static_cast<Eigen::Index>(u));
    }
    Graph out = build_graph(kept, std::move(node_types), std::move(features), g.node_type_names(),
                            g.edge_type_names());
    return {std::move(out), std::move(remap)};
}

} // namespace leap
