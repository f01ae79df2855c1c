#pragma once

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "leap/closeness.hpp"
#include "leap/dataset.hpp"

namespace leap {

/// JSON cache of closeness label matrices, keyed by a hash of (graph edges,
/// anchor ids, held-out ids). Useful when the holdout is drawn once and
/// reused across runs.
inline std::string labels_cache_path(const std::string& dir, std::uint64_t key) {
    std::ostringstream name;
    name << dir << "/labels-" << std::hex << key << ".json";
    return name.str();
}

inline void save_labels_cache(const std::string& dir, std::uint64_t key,
                              const ClosenessLabels& labels) {
    nlohmann::ordered_json j;
    j["key"] = key;
    j["nodes"] = labels.nodes;
    j["k"] = labels.w.cols();
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < labels.w.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index c = 0; c < labels.w.cols(); ++c) row.push_back(labels.w(i, c));
        rows.push_back(row);
    }
    j["w"] = rows;
    std::filesystem::create_directories(dir);
    io::atomic_write(labels_cache_path(dir, key), j.dump() + "\n");
}

inline std::optional<ClosenessLabels> load_labels_cache(const std::string& dir, std::uint64_t key) {
    const std::string path = labels_cache_path(dir, key);
    if (!std::filesystem::exists(path)) return std::nullopt;
    const auto j = nlohmann::json::parse(io::read_file(path));
    if (j.at("key").get<std::uint64_t>() != key) return std::nullopt;
    ClosenessLabels labels;
    for (const auto& n : j.at("nodes")) labels.nodes.push_back(n.get<NodeId>());
    const auto& rows = j.at("w");
    const std::size_t k = j.at("k").get<std::size_t>();
    labels.w = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < k; ++c)
            labels.w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                rows[i][c].get<double>();
    return labels;
}

} // namespace leap
