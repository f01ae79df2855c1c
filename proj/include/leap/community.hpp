#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "leap/graph.hpp"
#include "leap/rng.hpp"

namespace leap {

struct CommunityPartition {
    std::vector<int> community; // node -> community id, contiguous from 0
    double modularity = 0.0;
    std::uint64_t seed = 0;
    std::size_t passes = 0;
    std::vector<double> pass_modularity; // Q after each pass, non-decreasing
};

/// Standard undirected modularity Q = sum_c [ in_c/(2m) - (tot_c/(2m))^2 ].
/// Q = 0 by convention on edgeless graphs.
inline double modularity(const Graph& g, const std::vector<int>& community) {
    if (community.size() != g.num_nodes())
        throw std::invalid_argument("modularity: community size mismatch");
    if (g.num_edges() == 0) return 0.0;
    int num_comms = 0;
    for (int c : community) {
        if (c < 0) throw std::invalid_argument("modularity: negative community id");
        num_comms = std::max(num_comms, c + 1);
    }
    std::vector<double> in(num_comms, 0.0), tot(num_comms, 0.0);
    for (const auto& [u, v] : g.edges())
        if (community[u] == community[v]) in[community[u]] += 2.0;
    for (std::size_t u = 0; u < g.num_nodes(); ++u)
        tot[community[u]] += static_cast<double>(g.degree(static_cast<NodeId>(u)));
    const double two_m = 2.0 * static_cast<double>(g.num_edges());
    double q = 0.0;
    for (int c = 0; c < num_comms; ++c) q += in[c] / two_m - (tot[c] / two_m) * (tot[c] / two_m);
    return q;
}

namespace detail {

// Weighted working graph for the contraction phases. Self weights hold the
// collapsed intra-community mass (diagonal of the weight matrix).
struct WeightedGraph {
    std::vector<std::vector<std::pair<int, double>>> adj;
    std::vector<double> self_weight;
    std::vector<double> strength; // k_i = self + sum of incident weights
    double total = 0.0;           // 2m

    std::size_t size() const { return adj.size(); }

    void finalize() {
        strength.assign(size(), 0.0);
        total = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            strength[i] = self_weight[i];
            for (const auto& [j, w] : adj[i]) strength[i] += w;
            total += strength[i];
        }
    }
};

inline double weighted_modularity(const WeightedGraph& wg, const std::vector<int>& comm) {
    int num_comms = 0;
    for (int c : comm) num_comms = std::max(num_comms, c + 1);
    std::vector<double> in(num_comms, 0.0), tot(num_comms, 0.0);
    for (std::size_t i = 0; i < wg.size(); ++i) {
        in[comm[i]] += wg.self_weight[i];
        tot[comm[i]] += wg.strength[i];
        for (const auto& [j, w] : wg.adj[i])
            if (comm[i] == comm[static_cast<std::size_t>(j)]) in[comm[i]] += w;
    }
    double q = 0.0;
    for (int c = 0; c < num_comms; ++c)
        q += in[c] / wg.total - (tot[c] / wg.total) * (tot[c] / wg.total);
    return q;
}

// One local-moving phase: repeated single-node moves to the neighboring
// community with maximal positive gain, until a full sweep moves nothing.
// Visit order is a seeded shuffle per sweep.
inline bool local_moving(const WeightedGraph& wg, std::vector<int>& comm, Rng& rng) {
    const std::size_t n = wg.size();
    std::vector<double> sigma_tot(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) sigma_tot[comm[i]] += wg.strength[i];

    std::vector<double> nbr_weight(n, 0.0);
    std::vector<int> touched;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        rng.shuffle(order);
        for (std::size_t idx : order) {
            const int cur = comm[idx];
            touched.clear();
            nbr_weight[cur] = 0.0;
            touched.push_back(cur);
            for (const auto& [j, w] : wg.adj[idx]) {
                const int c = comm[static_cast<std::size_t>(j)];
                if (nbr_weight[c] == 0.0 && c != cur) touched.push_back(c);
                nbr_weight[c] += w;
            }
            sigma_tot[cur] -= wg.strength[idx];

            // gain(c) ~ k_i_in(c) - sigma_tot(c) * k_i / 2m; constant terms
            // cancel across candidates. Ties keep the current community,
            // then prefer the smallest id, so sweeps are deterministic.
            std::sort(touched.begin(), touched.end());
            int best = cur;
            double best_gain = nbr_weight[cur] - sigma_tot[cur] * wg.strength[idx] / wg.total;
            for (int c : touched) {
                if (c == cur) continue;
                const double gain = nbr_weight[c] - sigma_tot[c] * wg.strength[idx] / wg.total;
                if (gain > best_gain + 1e-15) {
                    best = c;
                    best_gain = gain;
                }
            }
            sigma_tot[best] += wg.strength[idx];
            for (int c : touched) nbr_weight[c] = 0.0;
            if (best != cur) {
                comm[idx] = best;
                moved = true;
                any_move = true;
            }
        }
    }
    return any_move;
}

inline int renumber(std::vector<int>& comm) {
    std::vector<int> map(comm.size(), -1);
    int next = 0;
    for (int& c : comm) {
        if (map[c] < 0) map[c] = next++;
        c = map[c];
    }
    return next;
}

inline WeightedGraph contract(const WeightedGraph& wg, const std::vector<int>& comm, int num_comms) {
    WeightedGraph out;
    out.adj.resize(num_comms);
    out.self_weight.assign(num_comms, 0.0);
    std::vector<std::map<int, double>> acc(num_comms);
    for (std::size_t i = 0; i < wg.size(); ++i) {
        out.self_weight[comm[i]] += wg.self_weight[i];
        for (const auto& [j, w] : wg.adj[i]) {
            const int ci = comm[i], cj = comm[static_cast<std::size_t>(j)];
            if (ci == cj) out.self_weight[ci] += w; // both directions land here
            else acc[ci][cj] += w;
        }
    }
    // self_weight accumulated intra mass twice (once per direction); the
    // diagonal convention counts it once per ordered pair, which is exactly
    // that, so nothing to halve.
    for (int c = 0; c < num_comms; ++c)
        out.adj[c].assign(acc[c].begin(), acc[c].end());
    out.finalize();
    return out;
}

} // namespace detail

/// Louvain community detection: local moving + contraction, repeated until a
/// full pass improves modularity by less than 1e-7. Node visit order is a
/// seeded shuffle, recorded in the result for reproducibility.
inline CommunityPartition louvain(const Graph& g, std::uint64_t seed) {
    CommunityPartition part;
    part.seed = seed;
    part.community.resize(g.num_nodes());
    if (g.num_edges() == 0) {
        std::iota(part.community.begin(), part.community.end(), 0);
        part.modularity = 0.0;
        return part;
    }

    detail::WeightedGraph wg;
    wg.adj.resize(g.num_nodes());
    wg.self_weight.assign(g.num_nodes(), 0.0);
    for (const auto& [u, v] : g.edges()) {
        wg.adj[u].emplace_back(v, 1.0);
        wg.adj[v].emplace_back(u, 1.0);
    }
    wg.finalize();

    Rng rng(derive_seed(seed, 23));
    std::vector<int> node_to_comm(g.num_nodes());
    std::iota(node_to_comm.begin(), node_to_comm.end(), 0);

    std::vector<int> level(wg.size());
    std::iota(level.begin(), level.end(), 0);
    double q_prev = detail::weighted_modularity(wg, level);
    const double min_gain = 1e-7;

    for (;;) {
        const bool improved = detail::local_moving(wg, level, rng);
        ++part.passes;
        const int num_comms = detail::renumber(level);
        for (auto& c : node_to_comm) c = level[c];
        const double q_now = detail::weighted_modularity(wg, level);
        part.pass_modularity.push_back(q_now);
        if (!improved || q_now - q_prev < min_gain) break;
        q_prev = q_now;
        wg = detail::contract(wg, level, num_comms);
        level.assign(wg.size(), 0);
        std::iota(level.begin(), level.end(), 0);
    }

    detail::renumber(node_to_comm);
    part.community = std::move(node_to_comm);
    part.modularity = modularity(g, part.community);
    return part;
}

} // namespace leap
