#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "leap/graph.hpp"
#include "leap/matrix.hpp"

namespace leap {

/// Malformed or inconsistent input data (distinct from configuration errors
/// so the CLI can map the two to different exit codes).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DatasetBundle {
    std::string edges_path;
    std::string features_path;    // empty: zero-width features
    std::string node_types_path;  // empty: single node type
    std::string name = "dataset";
};

namespace io {

inline void atomic_write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + tmp);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw DataError("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
}

inline void put_f32(std::string& out, float f) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline float get_f32(const char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    float f;
    std::memcpy(&f, &bits, 4);
    return f;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace io

inline const char kFeaturesMagic[] = "LEAPF1";

/// Binary feature matrix: magic, two 64-bit little-endian counts, then
/// row-major 32-bit little-endian floats.
inline void save_features(const std::string& path, const Matrix& m) {
    std::string out(kFeaturesMagic, 6);
    io::put_u64(out, static_cast<std::uint64_t>(m.rows()));
    io::put_u64(out, static_cast<std::uint64_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) io::put_f32(out, static_cast<float>(m(i, j)));
    io::atomic_write(path, out);
}

inline Matrix parse_features_csv(const std::string& text, const std::string& path) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw DataError(path + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DataError(path + ": empty feature file");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

/// Loads the binary format when the magic matches, else falls back to CSV.
inline Matrix load_features(const std::string& path) {
    const std::string bytes = io::read_file(path);
    if (bytes.size() >= 22 && std::memcmp(bytes.data(), kFeaturesMagic, 6) == 0) {
        const std::uint64_t rows = io::get_u64(bytes.data() + 6);
        const std::uint64_t cols = io::get_u64(bytes.data() + 14);
        const std::size_t need = 22 + rows * cols * 4;
        if (bytes.size() != need)
            throw DataError(path + ": truncated feature file (" + std::to_string(bytes.size()) +
                            " bytes, expected " + std::to_string(need) + ")");
        Matrix m(rows, cols);
        const char* p = bytes.data() + 22;
        for (std::uint64_t i = 0; i < rows; ++i)
            for (std::uint64_t j = 0; j < cols; ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    static_cast<double>(io::get_f32(p));
                p += 4;
            }
        return m;
    }
    return parse_features_csv(bytes, path);
}

struct EdgeRecord {
    NodeId u, v;
    std::string type_name; // empty when untyped
};

/// One edge per line, "src dst [edge_type_name]"; '#' starts a comment.
inline std::vector<EdgeRecord> load_edge_list(const std::string& path) {
    const std::string text = io::read_file(path);
    std::vector<EdgeRecord> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long u, v;
        std::string type_name;
        if (!(ls >> u >> v))
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 'src dst [type]'");
        ls >> type_name; // optional
        if (u < 0 || v < 0)
            throw DataError(path + ":" + std::to_string(lineno) + ": negative node id");
        out.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v), type_name});
    }
    return out;
}

inline void save_edges(const std::string& path, const Graph& g) {
    std::string out;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        const auto [u, v] = g.edges()[e];
        out += std::to_string(u);
        out += ' ';
        out += std::to_string(v);
        if (g.num_edge_types() > 1) {
            out += ' ';
            out += g.edge_type_names()[g.edge_types()[e]];
        }
        out += '\n';
    }
    io::atomic_write(path, out);
}

/// "node_id type_name" per line.
inline std::vector<std::pair<NodeId, std::string>> load_node_type_list(const std::string& path) {
    const std::string text = io::read_file(path);
    std::vector<std::pair<NodeId, std::string>> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        long long id;
        std::string name;
        if (!(ls >> id >> name))
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 'node_id type_name'");
        if (id < 0) throw DataError(path + ":" + std::to_string(lineno) + ": negative node id");
        out.push_back({static_cast<NodeId>(id), name});
    }
    return out;
}

inline void save_node_types(const std::string& path, const Graph& g) {
    std::string out;
    for (std::size_t u = 0; u < g.num_nodes(); ++u) {
        out += std::to_string(u);
        out += ' ';
        out += g.node_type_names()[g.node_type(static_cast<NodeId>(u))];
        out += '\n';
    }
    io::atomic_write(path, out);
}

/// Assembles the canonical graph from the bundle. Node count comes from the
/// feature file when present; every referenced id must lie in [0, N).
inline Graph load_dataset(const DatasetBundle& bundle) {
    const auto records = load_edge_list(bundle.edges_path);

    std::vector<std::pair<NodeId, std::string>> type_records;
    if (!bundle.node_types_path.empty()) type_records = load_node_type_list(bundle.node_types_path);

    NodeId max_id = -1;
    for (const auto& r : records) max_id = std::max({max_id, r.u, r.v});
    for (const auto& [id, name] : type_records) max_id = std::max(max_id, id);

    Matrix features;
    std::size_t n;
    if (!bundle.features_path.empty()) {
        features = load_features(bundle.features_path);
        n = static_cast<std::size_t>(features.rows());
        if (static_cast<std::size_t>(max_id) >= n)
            throw DataError(bundle.edges_path + ": node id " + std::to_string(max_id) +
                            " out of range; feature file has " + std::to_string(n) +
                            " rows so ids must be 0.." + std::to_string(n - 1));
        if (!features.allFinite()) throw DataError(bundle.features_path + ": non-finite feature");
    } else {
        if (max_id < 0) throw DataError(bundle.edges_path + ": no nodes");
        n = static_cast<std::size_t>(max_id) + 1;
        features = Matrix::Zero(static_cast<Eigen::Index>(n), 0);
    }

    // Edge type ids in first-seen order; untyped edges share one type.
    std::vector<std::string> edge_type_names;
    std::map<std::string, int> edge_type_of;
    std::vector<EdgeInput> edges;
    edges.reserve(records.size());
    for (const auto& r : records) {
        const std::string key = r.type_name.empty() ? "edge" : r.type_name;
        auto it = edge_type_of.find(key);
        if (it == edge_type_of.end()) {
            it = edge_type_of.emplace(key, static_cast<int>(edge_type_names.size())).first;
            edge_type_names.push_back(key);
        }
        edges.push_back({r.u, r.v, it->second});
    }

    std::vector<int> node_types(n, 0);
    std::vector<std::string> node_type_names{"node"};
    if (!type_records.empty()) {
        node_type_names.clear();
        std::map<std::string, int> node_type_of;
        std::vector<char> seen(n, 0);
        for (const auto& [id, name] : type_records) {
            auto it = node_type_of.find(name);
            if (it == node_type_of.end()) {
                it = node_type_of.emplace(name, static_cast<int>(node_type_names.size())).first;
                node_type_names.push_back(name);
            }
            node_types[id] = it->second;
            seen[id] = 1;
        }
        for (std::size_t u = 0; u < n; ++u)
            if (!seen[u])
                throw DataError(bundle.node_types_path + ": node " + std::to_string(u) +
                                " has no type (file lists " + std::to_string(type_records.size()) +
                                " of " + std::to_string(n) + " nodes)");
    }

    try {
        return build_graph(edges, std::move(node_types), std::move(features),
                           std::move(node_type_names), std::move(edge_type_names));
    } catch (const std::invalid_argument& e) {
        throw DataError(bundle.name + ": " + e.what());
    }
}

} // namespace leap
