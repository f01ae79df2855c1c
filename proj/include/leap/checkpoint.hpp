#pragma once

#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

#include "leap/dataset.hpp"
#include "leap/model.hpp"

namespace leap {

inline const char kCheckpointMagic[] = "LEAPCKPT1";

/// Named parameter list: magic, count, then per parameter its name, rows,
/// cols and row-major 32-bit little-endian floats.
inline void save_checkpoint(const std::string& path, const ModelParams& params) {
    std::string out(kCheckpointMagic, 9);
    io::put_u64(out, params.items.size());
    for (const auto& item : params.items) {
        io::put_u64(out, item.name.size());
        out += item.name;
        io::put_u64(out, static_cast<std::uint64_t>(item.value.rows()));
        io::put_u64(out, static_cast<std::uint64_t>(item.value.cols()));
        for (Eigen::Index i = 0; i < item.value.rows(); ++i)
            for (Eigen::Index j = 0; j < item.value.cols(); ++j)
                io::put_f32(out, static_cast<float>(item.value(i, j)));
    }
    io::atomic_write(path, out);
}

inline std::vector<ModelParams::Item> load_checkpoint(const std::string& path) {
    const std::string bytes = io::read_file(path);
    const auto need = [&](std::size_t at, std::size_t n) {
        if (at + n > bytes.size()) throw DataError(path + ": truncated checkpoint");
    };
    need(0, 9 + 8);
    if (std::memcmp(bytes.data(), kCheckpointMagic, 9) != 0)
        throw DataError(path + ": not a checkpoint (bad magic)");
    std::size_t at = 9;
    const std::uint64_t count = io::get_u64(bytes.data() + at);
    at += 8;
    std::vector<ModelParams::Item> items;
    items.reserve(count);
    for (std::uint64_t p = 0; p < count; ++p) {
        need(at, 8);
        const std::uint64_t name_len = io::get_u64(bytes.data() + at);
        at += 8;
        need(at, name_len + 16);
        std::string name(bytes.data() + at, name_len);
        at += name_len;
        const std::uint64_t rows = io::get_u64(bytes.data() + at);
        const std::uint64_t cols = io::get_u64(bytes.data() + at + 8);
        at += 16;
        need(at, rows * cols * 4);
        Matrix m(rows, cols);
        for (std::uint64_t i = 0; i < rows; ++i)
            for (std::uint64_t j = 0; j < cols; ++j) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    static_cast<double>(io::get_f32(bytes.data() + at));
                at += 4;
            }
        items.push_back({std::move(name), std::move(m)});
    }
    if (at != bytes.size()) throw DataError(path + ": trailing bytes in checkpoint");
    return items;
}

/// Rebuilds params with the given shape metadata and overwrites every value
/// from the named list. Unknown, missing or misshapen entries are errors.
inline ModelParams restore_params(const Hyper& hyper, std::size_t feature_dim,
                                  std::size_t num_node_types, std::size_t num_edge_types,
                                  const std::vector<ModelParams::Item>& items) {
    ModelParams p = ModelParams::init(hyper, feature_dim, num_node_types, num_edge_types, 0);
    if (items.size() != p.items.size())
        throw DataError("checkpoint holds " + std::to_string(items.size()) + " parameters, model needs " +
                        std::to_string(p.items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].name != p.items[i].name)
            throw DataError("checkpoint parameter '" + items[i].name + "' does not match model slot '" +
                            p.items[i].name + "'");
        if (items[i].value.rows() != p.items[i].value.rows() ||
            items[i].value.cols() != p.items[i].value.cols())
            throw DataError("checkpoint parameter '" + items[i].name + "' has the wrong shape");
        p.items[i].value = items[i].value;
    }
    return p;
}

} // namespace leap
