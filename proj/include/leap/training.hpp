#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "leap/adam.hpp"
#include "leap/anchors.hpp"
#include "leap/closeness.hpp"
#include "leap/evaluate.hpp"
#include "leap/model.hpp"
#include "leap/rng.hpp"
#include "leap/split.hpp"

namespace leap {

struct TrainConfig {
    std::size_t epochs = 500;
    double lr = 0.01;
    double gamma = 0.5;
    std::size_t q = 1; // negatives per positive
    /// Per-epoch holdout size; 0 means one tenth of the train nodes.
    std::size_t holdout = 0;
    AnchorStrategy anchor_strategy = AnchorStrategy::Degree;
    std::size_t k = 100;
    std::uint64_t seed = 1;
    std::size_t patience = 20;
    /// Redraw the holdout every epoch (off reproduces a single fixed draw).
    bool resample_holdout = true;
    AugmentMode augment = AugmentMode::Learned;
    bool normalize_original_edges = false;
    std::size_t hidden = 128;
    std::size_t layers = 2;
    /// Restrict the holdout to one node type (defaults to the split's
    /// inductive type when set there).
    std::optional<int> holdout_node_type;
    double pagerank_damping = 0.85;
    CommunityInner community_inner = CommunityInner::Degree;
    /// Override for label computation, e.g. a file-backed cache. Must return
    /// exactly closeness_labels(g, holdout, anchors).
    std::function<ClosenessLabels(const Graph&, std::span<const NodeId>, const AnchorSet&)>
        label_source;

    void validate() const {
        if (gamma < 0) throw std::invalid_argument("TrainConfig: gamma must be >= 0");
        if (q < 1) throw std::invalid_argument("TrainConfig: q must be >= 1");
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
        if (k < 1) throw std::invalid_argument("TrainConfig: k must be >= 1");
        if (layers < 1 || hidden < 1) throw std::invalid_argument("TrainConfig: bad model shape");
    }
};

/// Regression loss between predicted and true closeness rows (mean over the
/// holdout of the squared row distance).
inline Tensor mlp_loss(Tape& tape, Tensor predicted, Tensor truth) {
    return tape.mse(predicted, truth);
}

/// Negative log-likelihood ranking loss, averaged over positives: each
/// positive edge contributes -log s(z_i . z_j) and its q negatives
/// -log s(-z_i . z_p). `pos_scores` is P x 1 and `neg_scores` (P*q) x 1.
inline Tensor gnn_loss(Tape& tape, Tensor pos_scores, Tensor neg_scores, std::size_t q) {
    if (pos_scores.rows == 0) throw std::invalid_argument("gnn_loss: empty positive set");
    if (neg_scores.rows != pos_scores.rows * q)
        throw std::invalid_argument("gnn_loss: expected q negatives per positive");
    Tensor ll = tape.add(tape.sum(tape.logsigmoid(pos_scores)),
                         tape.sum(tape.logsigmoid(tape.neg(neg_scores))));
    return tape.scale(ll, -1.0 / static_cast<double>(pos_scores.rows));
}

/// q ids uniform over V minus {i} and its neighbors, without replacement
/// within one draw. When the node is too well connected for that support,
/// falls back to uniform over V minus {i} and reports it.
inline std::vector<NodeId> sample_negatives(const Graph& g, NodeId i, std::size_t q, Rng& rng,
                                            bool* fell_back = nullptr) {
    if (q < 1) throw std::invalid_argument("sample_negatives: q must be >= 1");
    const std::size_t n = g.num_nodes();
    const bool fallback = q + g.degree(i) + 1 > n;
    if (fell_back) *fell_back = *fell_back || fallback;
    if (fallback && q + 1 > n)
        throw std::invalid_argument("sample_negatives: graph too small for q negatives");

    std::vector<NodeId> out;
    out.reserve(q);
    while (out.size() < q) {
        const auto cand = static_cast<NodeId>(rng.next_below(n));
        if (cand == i) continue;
        if (!fallback && g.has_edge(i, cand)) continue;
        if (std::find(out.begin(), out.end(), cand) != out.end()) continue;
        out.push_back(cand);
    }
    return out;
}

struct EpochRecord {
    std::size_t epoch = 0;
    double loss_total = 0.0;
    double loss_gnn = 0.0;
    double loss_mlp = 0.0;
    double val_auc = 0.0;
    double val_ap = 0.0;
};

struct TrainResult {
    ModelParams params;
    AnchorSet anchors;
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_auc = 0.0;
    bool negative_fallback = false;
    bool stopped_early = false;
};

namespace detail {

inline const std::uint64_t kAnchorStream = 61;
inline const std::uint64_t kInitStream = 67;
inline const std::uint64_t kValStream = 3;
inline const std::uint64_t kHoldoutBase = 100000;
inline const std::uint64_t kNegativeBase = 200000;

} // namespace detail

/// End-to-end joint training of linker and encoder on the split's train
/// graph. Each epoch: draw a holdout of train nodes, compute their closeness
/// labels on the intact train graph, hide their edges, wire them to the
/// anchors through the linker, and take one full-batch Adam step on
/// ranking loss + gamma * closeness regression. Early stopping tracks
/// validation AUC when the split provides validation pairs.
inline TrainResult train(const Graph& original, const Split& split, const TrainConfig& cfg) {
    cfg.validate();
    const Graph& g = split.train_graph;
    if (g.num_edges() == 0) throw std::invalid_argument("train: train graph has no edges");

    TrainResult result;
    result.anchors = select_anchors(g, cfg.k, cfg.anchor_strategy,
                                    derive_seed(cfg.seed, detail::kAnchorStream),
                                    {cfg.pagerank_damping, cfg.community_inner});

    Hyper hyper;
    hyper.k = cfg.k;
    hyper.hidden = cfg.hidden;
    hyper.layers = cfg.layers;
    hyper.gamma = cfg.gamma;
    hyper.q = cfg.q;
    hyper.normalize_original_edges = cfg.normalize_original_edges;
    result.params = ModelParams::init(hyper, g.feature_dim(), g.num_node_types(),
                                      g.num_edge_types(), derive_seed(cfg.seed, detail::kInitStream));

    // Holdout pool: train nodes that are not anchors (anchors must stay in
    // the graph to receive the augmented edges), optionally one node type.
    std::vector<char> is_anchor(g.num_nodes(), 0);
    for (NodeId a : result.anchors.ids) is_anchor[a] = 1;
    std::vector<NodeId> pool;
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
        if (is_anchor[u]) continue;
        if (cfg.holdout_node_type && g.node_type(static_cast<NodeId>(u)) != *cfg.holdout_node_type)
            continue;
        pool.push_back(static_cast<NodeId>(u));
    }
    std::size_t n_holdout = cfg.holdout ? cfg.holdout
                                        : std::max<std::size_t>(1, g.num_nodes() / 10);
    n_holdout = std::min(n_holdout, pool.size());
    if (n_holdout == 0) throw std::invalid_argument("train: no nodes available for the holdout");

    Adam adam({cfg.lr});
    std::vector<Matrix*> param_ptrs;
    for (auto& item : result.params.items) param_ptrs.push_back(&item.value);

    const bool has_validation = !split.valid_pairs.empty();
    std::vector<Matrix> best_values;
    double best_val = -1.0;
    std::size_t best_epoch = 0;

    std::vector<NodeId> holdout;
    ClosenessLabels labels;
    std::vector<char> in_holdout(g.num_nodes(), 0);
    std::vector<std::tuple<std::size_t, std::size_t, int>> epoch_edges;
    std::vector<std::pair<std::size_t, std::size_t>> positives;
    std::vector<NodeId> loss_nodes; // endpoint that receives the negatives
    LayeredAdj adj;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (epoch == 1 || cfg.resample_holdout) {
            Rng rng(derive_seed(cfg.seed, detail::kHoldoutBase + epoch));
            auto draw = rng.sample_without_replacement(pool.size(), n_holdout);
            holdout.clear();
            for (std::size_t ix : draw) holdout.push_back(pool[ix]);
            std::sort(holdout.begin(), holdout.end());
            labels = cfg.label_source ? cfg.label_source(g, holdout, result.anchors)
                                      : closeness_labels(g, holdout, result.anchors);

            std::fill(in_holdout.begin(), in_holdout.end(), 0);
            for (NodeId u : holdout) in_holdout[u] = 1;

            epoch_edges.clear();
            positives.clear();
            loss_nodes.clear();
            for (std::size_t e = 0; e < g.num_edges(); ++e) {
                const auto [u, v] = g.edges()[e];
                const bool hu = in_holdout[u], hv = in_holdout[v];
                if (hu && hv) continue; // holdout-internal edges carry no signal
                if (!hu && !hv) epoch_edges.emplace_back(u, v, g.edge_types()[e]);
                positives.emplace_back(u, v);
                loss_nodes.push_back(hv ? v : u);
            }
            std::vector<std::size_t> newcomer_rows(holdout.begin(), holdout.end());
            std::vector<std::size_t> anchor_rows(result.anchors.ids.begin(),
                                                 result.anchors.ids.end());
            adj = build_layered(g.num_nodes(), epoch_edges, g.num_edge_types(), newcomer_rows,
                                anchor_rows, cfg.augment, cfg.normalize_original_edges);
        }
        if (positives.empty()) throw std::invalid_argument("train: epoch has no positive edges");

        Rng neg_rng(derive_seed(cfg.seed, detail::kNegativeBase + epoch));
        std::vector<std::pair<std::size_t, std::size_t>> negatives;
        negatives.reserve(positives.size() * cfg.q);
        for (std::size_t p = 0; p < positives.size(); ++p) {
            const NodeId i = loss_nodes[p];
            for (NodeId neg : sample_negatives(g, i, cfg.q, neg_rng, &result.negative_fallback))
                negatives.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(neg));
        }

        EpochRecord record;
        record.epoch = epoch;
        try {
            Tape tape;
            StagedParams sp = stage(tape, result.params);
            Tensor x = tape.leaf(g.features());
            std::vector<std::size_t> holdout_rows(holdout.begin(), holdout.end());
            std::vector<int> holdout_types;
            for (NodeId u : holdout) holdout_types.push_back(g.node_type(u));
            Tensor w_tilde = link(tape, result.params, sp, tape.gather_rows(x, holdout_rows),
                                  holdout_types);
            Tensor z = encode(tape, result.params, sp, x, adj, w_tilde);

            Tensor pos_scores = decode(tape, z, positives);
            Tensor neg_scores = decode(tape, z, negatives);
            Tensor l_gnn = gnn_loss(tape, pos_scores, neg_scores, cfg.q);
            Tensor l_mlp = mlp_loss(tape, w_tilde, tape.leaf(labels.w));
            Tensor total = tape.add(l_gnn, tape.scale(l_mlp, cfg.gamma));

            record.loss_gnn = tape.value(l_gnn)(0, 0);
            record.loss_mlp = tape.value(l_mlp)(0, 0);
            record.loss_total = tape.value(total)(0, 0);

            tape.backward(total);
            std::vector<const Matrix*> grads;
            for (Tensor t : sp.t) grads.push_back(&tape.grad(t));
            adam.step(param_ptrs, grads);
        } catch (const std::runtime_error& e) {
            throw std::runtime_error("train: aborted at epoch " + std::to_string(epoch) +
                                     " (likely divergence): " + e.what());
        }

        if (has_validation) {
            const EvalReport val =
                evaluate(result.params, result.anchors, original, split, /*use_test_set=*/false,
                         cfg.augment, derive_seed(cfg.seed, detail::kValStream));
            record.val_auc = val.auc;
            record.val_ap = val.ap;
            if (val.auc > best_val) {
                best_val = val.auc;
                best_epoch = epoch;
                best_values.clear();
                for (const auto& item : result.params.items) best_values.push_back(item.value);
            }
        }
        result.history.push_back(record);

        if (has_validation && epoch - best_epoch >= cfg.patience) {
            result.stopped_early = true;
            break;
        }
    }

    if (has_validation && !best_values.empty()) {
        for (std::size_t i = 0; i < best_values.size(); ++i)
            result.params.items[i].value = best_values[i];
        result.best_epoch = best_epoch;
        result.best_val_auc = best_val;
    } else {
        result.best_epoch = result.history.size();
        result.best_val_auc = 0.0;
    }
    return result;
}

} // namespace leap
