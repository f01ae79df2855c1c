#pragma once

#include <cstdint>
#include <vector>

#include "leap/graph.hpp"
#include "leap/rng.hpp"

namespace leap {

/// Planted-block benchmark generator: equal-size blocks, independent edges
/// with intra/inter probabilities, features = block indicator plus Gaussian
/// noise. Fully determined by the seed.
struct SbmConfig {
    std::size_t nodes = 400;
    std::size_t blocks = 2;
    double p_intra = 0.05;
    double p_inter = 0.005;
    double noise = 0.5;
    std::uint64_t seed = 7;
};

struct SbmData {
    Graph graph;
    std::vector<int> block;
};

inline SbmData generate_sbm(const SbmConfig& cfg) {
    if (cfg.blocks == 0 || cfg.nodes < cfg.blocks)
        throw std::invalid_argument("generate_sbm: need at least one node per block");
    SbmData data;
    data.block.resize(cfg.nodes);
    for (std::size_t i = 0; i < cfg.nodes; ++i)
        data.block[i] = static_cast<int>(i * cfg.blocks / cfg.nodes);

    Rng edge_rng(derive_seed(cfg.seed, 201));
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t u = 0; u < cfg.nodes; ++u)
        for (std::size_t v = u + 1; v < cfg.nodes; ++v) {
            const double p = data.block[u] == data.block[v] ? cfg.p_intra : cfg.p_inter;
            if (edge_rng.next_real() < p)
                edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        }

    Rng feat_rng(derive_seed(cfg.seed, 202));
    Matrix features = Matrix::Zero(static_cast<Eigen::Index>(cfg.nodes),
                                   static_cast<Eigen::Index>(cfg.blocks));
    for (std::size_t i = 0; i < cfg.nodes; ++i)
        for (std::size_t b = 0; b < cfg.blocks; ++b)
            features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) =
                (data.block[i] == static_cast<int>(b) ? 1.0 : 0.0) +
                cfg.noise * feat_rng.next_normal();

    data.graph = build_graph(edges, cfg.nodes, std::move(features));
    return data;
}

} // namespace leap
