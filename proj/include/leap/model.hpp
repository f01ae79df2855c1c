#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "leap/anchors.hpp"
#include "leap/graph.hpp"
#include "leap/rng.hpp"
#include "leap/tensor.hpp"

namespace leap {

enum class AugmentMode { Learned, Unweighted, None };

inline std::string to_string(AugmentMode m) {
    switch (m) {
        case AugmentMode::Learned: return "learned";
        case AugmentMode::Unweighted: return "unweighted";
        case AugmentMode::None: return "none";
    }
    return "?";
}

inline AugmentMode augment_mode_from_string(const std::string& s) {
    if (s == "learned") return AugmentMode::Learned;
    if (s == "unweighted") return AugmentMode::Unweighted;
    if (s == "none") return AugmentMode::None;
    throw std::invalid_argument("unknown augment mode: " + s);
}

struct Hyper {
    std::size_t k = 100;      // anchors
    std::size_t hidden = 128; // embedding width
    std::size_t layers = 2;
    double gamma = 0.5;       // linker loss weight
    std::size_t q = 1;        // negatives per positive
    std::string aggregation = "sum";
    bool normalize_original_edges = false;
};

/// All learnable weights with named access for checkpointing. The linker
/// holds one (W, b) pair per node type; the encoder holds two towers per
/// layer: one over the original edges (neighbor weight per edge type) and
/// one over the augmented edges.
class ModelParams {
public:
    struct Item {
        std::string name;
        Matrix value;
    };

    Hyper hyper;
    std::size_t feature_dim = 0;
    std::size_t num_node_types = 1;
    std::size_t num_edge_types = 1;
    std::vector<Item> items;

    static ModelParams init(const Hyper& hyper, std::size_t feature_dim,
                            std::size_t num_node_types, std::size_t num_edge_types,
                            std::uint64_t seed) {
        ModelParams p;
        p.hyper = hyper;
        p.feature_dim = feature_dim;
        p.num_node_types = num_node_types;
        p.num_edge_types = num_edge_types;
        if (hyper.layers == 0) throw std::invalid_argument("ModelParams: layers must be >= 1");
        if (hyper.aggregation != "sum")
            throw std::invalid_argument("ModelParams: only sum aggregation is supported");

        const auto glorot = [&](std::size_t rows, std::size_t cols, std::uint64_t stream) {
            Matrix m(rows, cols);
            Rng rng(derive_seed(seed, 101 + stream));
            const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = a * (2.0 * rng.next_real() - 1.0);
            return m;
        };

        std::uint64_t stream = 0;
        for (std::size_t t = 0; t < num_node_types; ++t) {
            p.items.push_back({"linker.w" + std::to_string(t),
                               glorot(hyper.k, feature_dim, stream++)});
            p.items.push_back({"linker.b" + std::to_string(t), Matrix::Zero(1, hyper.k)});
            ++stream;
        }
        for (std::size_t l = 0; l < hyper.layers; ++l) {
            const std::size_t in = l == 0 ? feature_dim : hyper.hidden;
            p.items.push_back({"gnn.e.l" + std::to_string(l) + ".self",
                               glorot(hyper.hidden, in, stream++)});
            for (std::size_t r = 0; r < num_edge_types; ++r)
                p.items.push_back({"gnn.e.l" + std::to_string(l) + ".r" + std::to_string(r),
                                   glorot(hyper.hidden, in, stream++)});
        }
        for (std::size_t l = 0; l < hyper.layers; ++l) {
            const std::size_t in = l == 0 ? feature_dim : hyper.hidden;
            p.items.push_back({"gnn.aug.l" + std::to_string(l) + ".self",
                               glorot(hyper.hidden, in, stream++)});
            p.items.push_back({"gnn.aug.l" + std::to_string(l) + ".nbr",
                               glorot(hyper.hidden, in, stream++)});
        }
        return p;
    }

    std::size_t linker_w(int node_type) const { return 2 * check_type(node_type); }
    std::size_t linker_b(int node_type) const { return 2 * check_type(node_type) + 1; }
    std::size_t orig_self(std::size_t layer) const {
        return 2 * num_node_types + layer * (1 + num_edge_types);
    }
    std::size_t orig_rel(std::size_t layer, std::size_t edge_type) const {
        return orig_self(layer) + 1 + edge_type;
    }
    std::size_t aug_self(std::size_t layer) const {
        return 2 * num_node_types + hyper.layers * (1 + num_edge_types) + 2 * layer;
    }
    std::size_t aug_nbr(std::size_t layer) const { return aug_self(layer) + 1; }

    const Matrix& value(std::size_t idx) const { return items.at(idx).value; }
    Matrix& value(std::size_t idx) { return items.at(idx).value; }

private:
    std::size_t check_type(int t) const {
        if (t < 0 || static_cast<std::size_t>(t) >= num_node_types)
            throw std::invalid_argument("ModelParams: unknown node type " + std::to_string(t));
        return static_cast<std::size_t>(t);
    }
};

/// Parameter leaves on a tape, aligned with ModelParams::items.
struct StagedParams {
    std::vector<Tensor> t;
};

inline StagedParams stage(Tape& tape, const ModelParams& p) {
    StagedParams sp;
    sp.t.reserve(p.items.size());
    for (const auto& item : p.items) sp.t.push_back(tape.leaf(item.value, true));
    return sp;
}

/// Predicted anchor-closeness rows for the given new nodes: per node type t,
/// sigmoid(x W_t^T + b_t). Output n x k, entries in (0, 1), differentiable.
inline Tensor link(Tape& tape, const ModelParams& p, const StagedParams& sp, Tensor x_new,
                   std::span<const int> new_types) {
    if (new_types.size() != x_new.rows)
        throw std::invalid_argument("link: one node type per row");
    std::vector<std::vector<std::size_t>> rows_by_type(p.num_node_types);
    for (std::size_t r = 0; r < new_types.size(); ++r) {
        if (new_types[r] < 0 || static_cast<std::size_t>(new_types[r]) >= p.num_node_types)
            throw std::invalid_argument("link: unknown node type " + std::to_string(new_types[r]));
        rows_by_type[new_types[r]].push_back(r);
    }
    Tensor out;
    for (std::size_t t = 0; t < p.num_node_types; ++t) {
        if (rows_by_type[t].empty()) continue;
        Tensor x_t = tape.gather_rows(x_new, rows_by_type[t]);
        Tensor scores = tape.sigmoid(tape.add_bias(
            tape.matmul_nt(x_t, sp.t[p.linker_w(static_cast<int>(t))]),
            sp.t[p.linker_b(static_cast<int>(t))]));
        Tensor placed = tape.scatter_rows(scores, rows_by_type[t], new_types.size());
        out = out.valid() ? tape.add(out, placed) : placed;
    }
    return out;
}

/// Message-passing layers: original edges per edge type plus the augmented
/// newcomer-anchor edges as their own layer.
struct LayeredAdj {
    std::size_t rows = 0;
    std::vector<std::shared_ptr<const SparseAdj>> original; // one per edge type
    std::shared_ptr<const SparseAdj> augmented;             // null when not augmented
    AugmentMode mode = AugmentMode::None;
};

/// Low-level builder over an explicit row space. `edges` are undirected
/// (u, v, type) pairs among the rows; each contributes entries in both
/// directions with weight 1 (or symmetric degree normalization). Augmented
/// entries wire every newcomer row to every anchor row, in both directions,
/// weighted by the matching entry of the n x k prediction matrix.
inline LayeredAdj build_layered(std::size_t rows,
                                const std::vector<std::tuple<std::size_t, std::size_t, int>>& edges,
                                std::size_t num_edge_types,
                                std::span<const std::size_t> newcomer_rows,
                                std::span<const std::size_t> anchor_rows, AugmentMode mode,
                                bool normalize) {
    LayeredAdj adj;
    adj.rows = rows;
    adj.mode = mode;

    std::vector<double> degree(rows, 0.0);
    if (normalize) {
        for (const auto& [u, v, t] : edges) {
            degree[u] += 1.0;
            degree[v] += 1.0;
        }
    }
    std::vector<std::vector<std::tuple<std::size_t, std::size_t, double>>> per_type(num_edge_types);
    for (const auto& [u, v, t] : edges) {
        if (u >= rows || v >= rows) throw std::invalid_argument("build_layered: edge out of range");
        if (t < 0 || static_cast<std::size_t>(t) >= num_edge_types)
            throw std::invalid_argument("build_layered: edge type out of range");
        const double w = normalize ? 1.0 / std::sqrt(degree[u] * degree[v]) : 1.0;
        per_type[t].emplace_back(u, v, w);
        per_type[t].emplace_back(v, u, w);
    }
    for (std::size_t t = 0; t < num_edge_types; ++t)
        adj.original.push_back(
            std::make_shared<SparseAdj>(SparseAdj::from_triplets(rows, rows, per_type[t])));

    if (mode != AugmentMode::None && !newcomer_rows.empty() && !anchor_rows.empty()) {
        const std::size_t k = anchor_rows.size();
        SparseAdj s;
        s.rows = s.cols = rows;
        std::vector<std::size_t> count(rows, 0);
        for (std::size_t r = 0; r < newcomer_rows.size(); ++r) count[newcomer_rows[r]] += k;
        for (std::size_t a : anchor_rows) count[a] += newcomer_rows.size();
        s.offsets.assign(rows + 1, 0);
        for (std::size_t i = 0; i < rows; ++i) s.offsets[i + 1] = s.offsets[i] + count[i];
        const std::size_t nnz = s.offsets[rows];
        s.col.resize(nnz);
        if (mode == AugmentMode::Learned) s.src.resize(nnz);
        else s.weight.assign(nnz, 1.0);
        std::vector<std::size_t> cursor(s.offsets.begin(), s.offsets.end() - 1);
        for (std::size_t r = 0; r < newcomer_rows.size(); ++r)
            for (std::size_t j = 0; j < k; ++j) {
                const std::size_t nrow = newcomer_rows[r], arow = anchor_rows[j];
                if (nrow >= rows || arow >= rows)
                    throw std::invalid_argument("build_layered: augmented row out of range");
                s.col[cursor[nrow]] = arow;
                if (mode == AugmentMode::Learned) s.src[cursor[nrow]] = r * k + j;
                ++cursor[nrow];
                s.col[cursor[arow]] = nrow;
                if (mode == AugmentMode::Learned) s.src[cursor[arow]] = r * k + j;
                ++cursor[arow];
            }
        adj.augmented = std::make_shared<SparseAdj>(std::move(s));
    }
    return adj;
}

/// Eval-time layout: train-graph rows first, one appended row per newcomer,
/// anchors taken from the train graph.
inline LayeredAdj build_augmented(const Graph& g_train, std::size_t num_new,
                                  const AnchorSet& anchors, AugmentMode mode,
                                  bool normalize = false) {
    for (NodeId a : anchors.ids)
        if (a < 0 || static_cast<std::size_t>(a) >= g_train.num_nodes())
            throw std::invalid_argument("build_augmented: anchor not in train graph");
    const std::size_t rows = g_train.num_nodes() + num_new;
    std::vector<std::tuple<std::size_t, std::size_t, int>> edges;
    edges.reserve(g_train.num_edges());
    for (std::size_t e = 0; e < g_train.num_edges(); ++e) {
        const auto [u, v] = g_train.edges()[e];
        edges.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v),
                           g_train.edge_types()[e]);
    }
    std::vector<std::size_t> newcomer_rows(num_new);
    for (std::size_t i = 0; i < num_new; ++i) newcomer_rows[i] = g_train.num_nodes() + i;
    std::vector<std::size_t> anchor_rows(anchors.ids.begin(), anchors.ids.end());
    return build_layered(rows, edges, g_train.num_edge_types(), newcomer_rows, anchor_rows, mode,
                         normalize);
}

/// Two stacked message-passing towers; the first reads only original edges
/// (edge-type-specific neighbor weights), the second only augmented edges.
/// Hidden layers apply ReLU; the final layer is linear so embeddings keep
/// signed coordinates for the dot-product decoder (a terminal ReLU confines
/// them to the nonnegative orthant, which empirically collapses training).
/// Tower outputs are summed; with no augmented entries the model reduces to
/// the plain original-edge tower.
inline Tensor encode(Tape& tape, const ModelParams& p, const StagedParams& sp, Tensor x_all,
                     const LayeredAdj& adj, Tensor w_tilde = {}) {
    if (adj.rows != x_all.rows) throw std::invalid_argument("encode: row count mismatch");
    if (adj.original.size() != p.num_edge_types)
        throw std::invalid_argument("encode: one original layer per edge type");

    Tensor h = x_all;
    for (std::size_t l = 0; l < p.hyper.layers; ++l) {
        Tensor pre = tape.matmul_nt(h, sp.t[p.orig_self(l)]);
        for (std::size_t r = 0; r < p.num_edge_types; ++r) {
            if (adj.original[r]->nnz() == 0) continue;
            pre = tape.add(pre, tape.spmm(adj.original[r], tape.matmul_nt(h, sp.t[p.orig_rel(l, r)])));
        }
        h = l + 1 < p.hyper.layers ? tape.relu(pre) : pre;
    }
    Tensor z = h;

    if (adj.augmented && adj.augmented->nnz() > 0) {
        if (adj.mode == AugmentMode::Learned && !w_tilde.valid())
            throw std::invalid_argument("encode: learned augmentation needs the prediction tensor");
        // Mean-style aggregation: every newcomer is wired to k anchors, so
        // 1/k keeps the augmented messages on the same scale as the inputs
        // regardless of k.
        const double inv_k = 1.0 / static_cast<double>(p.hyper.k);
        Tensor g = x_all;
        for (std::size_t l = 0; l < p.hyper.layers; ++l) {
            Tensor messages = tape.matmul_nt(g, sp.t[p.aug_nbr(l)]);
            Tensor agg = adj.mode == AugmentMode::Learned
                             ? tape.spmm(adj.augmented, messages, w_tilde)
                             : tape.spmm(adj.augmented, messages);
            Tensor pre = tape.add(tape.matmul_nt(g, sp.t[p.aug_self(l)]), tape.scale(agg, inv_k));
            g = l + 1 < p.hyper.layers ? tape.relu(pre) : pre;
        }
        z = tape.add(z, g);
    }
    return z;
}

/// Dot-product edge scores z_i . z_j, one per pair.
inline Tensor decode(Tape& tape, Tensor z, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<std::size_t> lhs(pairs.size()), rhs(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        lhs[i] = pairs[i].first;
        rhs[i] = pairs[i].second;
    }
    return tape.rowwise_dot(tape.gather_rows(z, lhs), tape.gather_rows(z, rhs));
}

} // namespace leap
