#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "leap/metrics.hpp"
#include "leap/model.hpp"
#include "leap/rng.hpp"
#include "leap/split.hpp"

namespace leap {

struct EvalReport {
    double auc = 0.0;
    double ap = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline const std::uint64_t kEvalNegStream = 53;

} // namespace detail

/// Scores held-out positives against an equal count of sampled non-edges.
///
/// Inductive: each newcomer's features pass through the linker, the augmented
/// adjacency and the encoder jointly with the train graph; positives are its
/// held-out edges to train nodes, negatives pair it with uniform non-neighbor
/// train nodes. Transductive: positives are held-out edges among train-graph
/// nodes, negatives are uniform non-edges. Non-edge checks always consult the
/// full original graph, so a true held-out edge is never sampled as negative.
inline EvalReport evaluate(const ModelParams& params, const AnchorSet& anchors,
                           const Graph& original, const Split& split, bool use_test_set,
                           AugmentMode mode, std::uint64_t seed) {
    const Graph& g_train = split.train_graph;
    const auto& pairs = use_test_set ? split.test_pairs : split.valid_pairs;
    if (pairs.empty()) throw std::invalid_argument("evaluate: no positive pairs in split");

    Rng rng(derive_seed(seed, detail::kEvalNegStream));
    EvalReport report;
    report.seed = seed;

    Tape tape;
    StagedParams sp = stage(tape, params);
    std::vector<std::pair<std::size_t, std::size_t>> pos_rows, neg_rows;

    if (split.mode == SplitMode::InductiveNode) {
        const auto& newcomers = use_test_set ? split.test_nodes : split.valid_nodes;
        // Leak check: every newcomer must be absent from the train graph.
        for (NodeId nc : newcomers)
            if (split.remap[nc] != -1)
                throw std::logic_error("evaluate: newcomer leaked into the train graph");

        std::vector<std::size_t> row_of(original.num_nodes(), SIZE_MAX);
        Matrix x_new(newcomers.size(), original.features().cols());
        std::vector<int> new_types(newcomers.size());
        for (std::size_t i = 0; i < newcomers.size(); ++i) {
            row_of[newcomers[i]] = g_train.num_nodes() + i;
            x_new.row(static_cast<Eigen::Index>(i)) = original.features().row(newcomers[i]);
            new_types[i] = original.node_type(newcomers[i]);
        }

        Matrix x_all(g_train.num_nodes() + newcomers.size(), g_train.features().cols());
        x_all.topRows(static_cast<Eigen::Index>(g_train.num_nodes())) = g_train.features();
        x_all.bottomRows(static_cast<Eigen::Index>(newcomers.size())) = x_new;

        Tensor x = tape.leaf(std::move(x_all));
        std::vector<std::size_t> newcomer_rows(newcomers.size());
        for (std::size_t i = 0; i < newcomers.size(); ++i)
            newcomer_rows[i] = g_train.num_nodes() + i;
        Tensor w_tilde = link(tape, params, sp, tape.gather_rows(x, newcomer_rows), new_types);
        LayeredAdj adj = build_augmented(g_train, newcomers.size(), anchors, mode,
                                         params.hyper.normalize_original_edges);
        Tensor z = encode(tape, params, sp, x, adj, w_tilde);

        std::vector<NodeId> train_row_to_orig(g_train.num_nodes(), -1);
        for (std::size_t u = 0; u < split.remap.size(); ++u)
            if (split.remap[u] >= 0) train_row_to_orig[split.remap[u]] = static_cast<NodeId>(u);

        for (const auto& [nc, t] : pairs) {
            pos_rows.emplace_back(row_of[nc], static_cast<std::size_t>(split.remap[t]));
            // Matching negative: same newcomer, random non-neighbor train node.
            for (;;) {
                const auto cand = static_cast<std::size_t>(rng.next_below(g_train.num_nodes()));
                if (original.has_edge(nc, train_row_to_orig[cand])) continue;
                neg_rows.emplace_back(row_of[nc], cand);
                break;
            }
        }
        const Matrix scores_pos = tape.value(decode(tape, z, pos_rows));
        const Matrix scores_neg = tape.value(decode(tape, z, neg_rows));
        std::vector<double> ps(scores_pos.data(), scores_pos.data() + scores_pos.rows());
        std::vector<double> ns(scores_neg.data(), scores_neg.data() + scores_neg.rows());
        report.auc = auc(ps, ns);
        report.ap = average_precision(ps, ns);
        report.n_pos = ps.size();
        report.n_neg = ns.size();
        return report;
    }

    // Transductive: all nodes are in the train graph, no augmentation rows.
    Tensor x = tape.leaf(g_train.features());
    LayeredAdj adj = build_augmented(g_train, 0, anchors, mode,
                                     params.hyper.normalize_original_edges);
    Tensor z = encode(tape, params, sp, x, adj);
    for (const auto& [u, v] : pairs) {
        pos_rows.emplace_back(static_cast<std::size_t>(u), static_cast<std::size_t>(v));
        for (;;) {
            const auto a = static_cast<NodeId>(rng.next_below(original.num_nodes()));
            const auto b = static_cast<NodeId>(rng.next_below(original.num_nodes()));
            if (a == b || original.has_edge(a, b)) continue;
            neg_rows.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
            break;
        }
    }
    const Matrix scores_pos = tape.value(decode(tape, z, pos_rows));
    const Matrix scores_neg = tape.value(decode(tape, z, neg_rows));
    std::vector<double> ps(scores_pos.data(), scores_pos.data() + scores_pos.rows());
    std::vector<double> ns(scores_neg.data(), scores_neg.data() + scores_neg.rows());
    report.auc = auc(ps, ns);
    report.ap = average_precision(ps, ns);
    report.n_pos = ps.size();
    report.n_neg = ns.size();
    return report;
}

/// Per-run metrics plus mean and population standard deviation across runs.
struct RunMetrics {
    std::uint64_t seed = 0;
    double auc = 0.0;
    double ap = 0.0;
};

struct AggregateReport {
    std::vector<RunMetrics> runs;
    double mean_auc = 0.0, std_auc = 0.0;
    double mean_ap = 0.0, std_ap = 0.0;
};

inline AggregateReport aggregate_runs(std::vector<RunMetrics> runs) {
    if (runs.empty()) throw std::invalid_argument("aggregate_runs: no runs");
    AggregateReport out;
    out.runs = std::move(runs);
    const double n = static_cast<double>(out.runs.size());
    for (const auto& r : out.runs) {
        out.mean_auc += r.auc / n;
        out.mean_ap += r.ap / n;
    }
    for (const auto& r : out.runs) {
        out.std_auc += (r.auc - out.mean_auc) * (r.auc - out.mean_auc) / n;
        out.std_ap += (r.ap - out.mean_ap) * (r.ap - out.mean_ap) / n;
    }
    out.std_auc = std::sqrt(out.std_auc);
    out.std_ap = std::sqrt(out.std_ap);
    return out;
}

} // namespace leap
