#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "leap/community.hpp"
#include "leap/graph.hpp"
#include "leap/pagerank.hpp"
#include "leap/rng.hpp"

namespace leap {

enum class AnchorStrategy { Random, Degree, PageRank, Community, Stratified };
enum class CommunityInner { Degree, Random };

inline std::string to_string(AnchorStrategy s) {
    switch (s) {
        case AnchorStrategy::Random: return "random";
        case AnchorStrategy::Degree: return "degree";
        case AnchorStrategy::PageRank: return "pagerank";
        case AnchorStrategy::Community: return "community";
        case AnchorStrategy::Stratified: return "stratified";
    }
    return "?";
}

inline AnchorStrategy anchor_strategy_from_string(const std::string& s) {
    if (s == "random") return AnchorStrategy::Random;
    if (s == "degree") return AnchorStrategy::Degree;
    if (s == "pagerank") return AnchorStrategy::PageRank;
    if (s == "community") return AnchorStrategy::Community;
    if (s == "stratified") return AnchorStrategy::Stratified;
    throw std::invalid_argument("unknown anchor strategy: " + s);
}

/// Ordered set of k distinct node ids plus the strategy that produced it.
struct AnchorSet {
    std::vector<NodeId> ids;
    AnchorStrategy strategy = AnchorStrategy::Degree;
    std::uint64_t seed = 0;

    std::size_t size() const { return ids.size(); }
};

namespace detail {

inline void check_k(const Graph& g, std::size_t k) {
    if (k == 0) throw std::invalid_argument("anchors: k must be positive");
    if (k > g.num_nodes())
        throw std::invalid_argument("anchors: k (" + std::to_string(k) + ") exceeds node count (" +
                                    std::to_string(g.num_nodes()) + ")");
}

/// Proportional quotas by largest remainder, respecting per-bucket caps.
/// Ties go to the lower bucket id. Total capacity must cover k.
inline std::vector<std::size_t> largest_remainder_quotas(const std::vector<double>& weights,
                                                         std::size_t k,
                                                         const std::vector<std::size_t>& caps) {
    const std::size_t b = weights.size();
    std::vector<std::size_t> quota(b, 0);
    std::size_t remaining = k;
    while (remaining > 0) {
        double active_weight = 0.0;
        for (std::size_t i = 0; i < b; ++i)
            if (quota[i] < caps[i]) active_weight += weights[i];
        if (active_weight <= 0.0) throw std::invalid_argument("quotas: insufficient capacity");

        std::vector<std::pair<double, std::size_t>> rem; // (-remainder, id) for stable sort
        std::size_t assigned = 0;
        std::vector<std::size_t> add(b, 0);
        for (std::size_t i = 0; i < b; ++i) {
            if (quota[i] >= caps[i]) continue;
            const double ideal = static_cast<double>(remaining) * weights[i] / active_weight;
            add[i] = std::min(static_cast<std::size_t>(ideal), caps[i] - quota[i]);
            assigned += add[i];
            if (quota[i] + add[i] < caps[i])
                rem.emplace_back(-(ideal - static_cast<double>(static_cast<std::size_t>(ideal))), i);
        }
        std::sort(rem.begin(), rem.end());
        for (const auto& [negr, i] : rem) {
            if (assigned >= remaining) break;
            ++add[i];
            ++assigned;
        }
        if (assigned == 0) throw std::invalid_argument("quotas: allocation stalled");
        for (std::size_t i = 0; i < b; ++i) quota[i] += add[i];
        remaining -= assigned; // sum of adds never exceeds remaining
    }
    return quota;
}

inline std::vector<NodeId> top_by_score(const std::vector<double>& score,
                                        const std::vector<NodeId>& candidates, std::size_t k) {
    std::vector<NodeId> order = candidates;
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b; // ties by ascending id
    });
    order.resize(k);
    return order;
}

} // namespace detail

/// k distinct nodes, uniform without replacement, in draw order.
inline AnchorSet select_random(const Graph& g, std::size_t k, std::uint64_t seed) {
    detail::check_k(g, k);
    Rng rng(derive_seed(seed, 31));
    auto draw = rng.sample_without_replacement(g.num_nodes(), k);
    AnchorSet out;
    out.strategy = AnchorStrategy::Random;
    out.seed = seed;
    for (std::size_t i : draw) out.ids.push_back(static_cast<NodeId>(i));
    return out;
}

/// Top-k by degree, ties broken by ascending node id.
inline AnchorSet select_by_degree(const Graph& g, std::size_t k) {
    detail::check_k(g, k);
    std::vector<double> deg(g.num_nodes());
    std::vector<NodeId> all(g.num_nodes());
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
        deg[u] = static_cast<double>(g.degree(static_cast<NodeId>(u)));
        all[u] = static_cast<NodeId>(u);
    }
    AnchorSet out;
    out.strategy = AnchorStrategy::Degree;
    out.ids = detail::top_by_score(deg, all, k);
    return out;
}

/// Top-k by PageRank score, ties broken by ascending node id.
inline AnchorSet select_by_pagerank(const Graph& g, std::size_t k, double damping = 0.85) {
    detail::check_k(g, k);
    auto pr = pagerank(g, damping);
    std::vector<NodeId> all(g.num_nodes());
    std::iota(all.begin(), all.end(), 0);
    AnchorSet out;
    out.strategy = AnchorStrategy::PageRank;
    out.ids = detail::top_by_score(pr.scores, all, k);
    return out;
}

/// Louvain partition, then per-community quotas proportional to community
/// size (largest remainder); within each community the inner strategy ranks
/// or draws. Output concatenated in community-id order.
inline AnchorSet select_community(const Graph& g, std::size_t k, CommunityInner inner,
                                  std::uint64_t seed) {
    detail::check_k(g, k);
    auto part = louvain(g, seed);
    int num_comms = 0;
    for (int c : part.community) num_comms = std::max(num_comms, c + 1);

    std::vector<std::vector<NodeId>> members(num_comms);
    for (std::size_t u = 0; u < g.num_nodes(); ++u)
        members[part.community[u]].push_back(static_cast<NodeId>(u));

    std::vector<double> weights(num_comms);
    std::vector<std::size_t> caps(num_comms);
    for (int c = 0; c < num_comms; ++c) {
        weights[c] = static_cast<double>(members[c].size());
        caps[c] = members[c].size();
    }
    const auto quota = detail::largest_remainder_quotas(weights, k, caps);

    AnchorSet out;
    out.strategy = AnchorStrategy::Community;
    out.seed = seed;
    for (int c = 0; c < num_comms; ++c) {
        if (quota[c] == 0) continue;
        if (inner == CommunityInner::Degree) {
            std::vector<double> deg(g.num_nodes());
            for (NodeId u : members[c]) deg[u] = static_cast<double>(g.degree(u));
            auto top = detail::top_by_score(deg, members[c], quota[c]);
            out.ids.insert(out.ids.end(), top.begin(), top.end());
        } else {
            Rng rng(derive_seed(seed, 37 + static_cast<std::uint64_t>(c)));
            auto draw = rng.sample_without_replacement(members[c].size(), quota[c]);
            for (std::size_t i : draw) out.ids.push_back(members[c][i]);
        }
    }
    return out;
}

/// Random anchors stratified by node type with equal per-type quotas
/// (largest remainder), for heterogeneous graphs.
inline AnchorSet select_stratified(const Graph& g, std::size_t k, std::uint64_t seed) {
    detail::check_k(g, k);
    const int num_types = static_cast<int>(g.num_node_types());
    std::vector<std::vector<NodeId>> members(num_types);
    for (std::size_t u = 0; u < g.num_nodes(); ++u)
        members[g.node_type(static_cast<NodeId>(u))].push_back(static_cast<NodeId>(u));

    std::vector<double> weights(num_types);
    std::vector<std::size_t> caps(num_types);
    for (int t = 0; t < num_types; ++t) {
        weights[t] = members[t].empty() ? 0.0 : 1.0; // equal share per populated type
        caps[t] = members[t].size();
    }
    const auto quota = detail::largest_remainder_quotas(weights, k, caps);

    AnchorSet out;
    out.strategy = AnchorStrategy::Stratified;
    out.seed = seed;
    for (int t = 0; t < num_types; ++t) {
        if (quota[t] == 0) continue;
        Rng rng(derive_seed(seed, 41 + static_cast<std::uint64_t>(t)));
        auto draw = rng.sample_without_replacement(members[t].size(), quota[t]);
        for (std::size_t i : draw) out.ids.push_back(members[t][i]);
    }
    return out;
}

struct AnchorOptions {
    double pagerank_damping = 0.85;
    CommunityInner community_inner = CommunityInner::Degree;
};

/// Strategy dispatcher. On heterogeneous graphs the random strategy draws
/// uniformly from each node type (stratified) rather than globally.
inline AnchorSet select_anchors(const Graph& g, std::size_t k, AnchorStrategy strategy,
                                std::uint64_t seed, const AnchorOptions& opts = {}) {
    switch (strategy) {
        case AnchorStrategy::Random:
            if (g.is_heterogeneous() && g.num_node_types() > 1) return select_stratified(g, k, seed);
            return select_random(g, k, seed);
        case AnchorStrategy::Degree: return select_by_degree(g, k);
        case AnchorStrategy::PageRank: return select_by_pagerank(g, k, opts.pagerank_damping);
        case AnchorStrategy::Community: return select_community(g, k, opts.community_inner, seed);
        case AnchorStrategy::Stratified: return select_stratified(g, k, seed);
    }
    throw std::invalid_argument("select_anchors: unknown strategy");
}

} // namespace leap
