#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "leap/graph.hpp"

namespace leap {

struct PageRankResult {
    std::vector<double> scores;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Damped random-walk scores with uniform teleport. Isolated nodes teleport
/// uniformly. Stops when the L1 change drops below tol; if max_iter is hit
/// first the best iterate is returned with converged = false.
inline PageRankResult pagerank(const Graph& g, double damping = 0.85, double tol = 1e-10,
                               std::size_t max_iter = 200) {
    const std::size_t n = g.num_nodes();
    if (n == 0) throw std::invalid_argument("pagerank: empty graph");
    if (damping < 0.0 || damping >= 1.0) throw std::invalid_argument("pagerank: damping in [0,1)");

    PageRankResult res;
    res.scores.assign(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n, 0.0);
    for (res.iterations = 1; res.iterations <= max_iter; ++res.iterations) {
        double dangling = 0.0;
        for (std::size_t u = 0; u < n; ++u)
            if (g.degree(static_cast<NodeId>(u)) == 0) dangling += res.scores[u];
        const double base = (1.0 - damping) / static_cast<double>(n) +
                            damping * dangling / static_cast<double>(n);
        for (std::size_t u = 0; u < n; ++u) next[u] = base;
        for (std::size_t u = 0; u < n; ++u) {
            const double share = res.scores[u] / static_cast<double>(g.degree(static_cast<NodeId>(u)) ?
                                                                     g.degree(static_cast<NodeId>(u)) : 1);
            for (NodeId v : g.neighbors(static_cast<NodeId>(u))) next[v] += damping * share;
        }
        double delta = 0.0;
        for (std::size_t u = 0; u < n; ++u) delta += std::abs(next[u] - res.scores[u]);
        res.scores.swap(next);
        if (delta < tol) {
            res.converged = true;
            break;
        }
    }
    if (res.iterations > max_iter) res.iterations = max_iter;
    return res;
}

} // namespace leap
