#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "leap/dataset.hpp"
#include "leap/split.hpp"
#include "leap/training.hpp"

namespace leap {

/// Everything a run needs, serializable as a key=value file. Every training
/// or evaluation run writes its fully resolved configuration beside its
/// outputs so the run can be reproduced or re-evaluated from the directory
/// alone.
struct RunConfig {
    // dataset
    std::string edges;
    std::string features;
    std::string node_types;
    std::string dataset_name = "dataset";
    // split
    std::string mode = "inductive"; // inductive | transductive
    double train_frac = 0.8;
    double valid_frac = 0.1;
    double test_frac = 0.1;
    std::string inductive_node_type; // type name; empty = unrestricted
    // model + training
    std::size_t epochs = 500;
    double lr = 0.01;
    double gamma = 0.5;
    std::size_t q = 1;
    std::size_t holdout = 0;
    std::string anchor_strategy = "degree";
    std::size_t k = 100;
    std::uint64_t seed = 1;
    std::size_t patience = 20;
    bool resample_holdout = true;
    std::string augment = "learned";
    bool normalize_original_edges = false;
    std::size_t hidden = 128; // config key "d"
    std::size_t layers = 2;   // config key "L"
    std::string aggregation = "sum";
    double pagerank_damping = 0.85;
    std::string community_inner = "degree";
    std::string labels_cache; // directory; empty disables the label cache
    std::size_t runs = 1;

    std::map<std::string, std::string> to_map() const {
        std::map<std::string, std::string> m;
        const auto real = [](double v) {
            std::ostringstream ss;
            ss.precision(17);
            ss << v;
            return ss.str();
        };
        m["edges"] = edges;
        m["features"] = features;
        m["node_types"] = node_types;
        m["dataset_name"] = dataset_name;
        m["mode"] = mode;
        m["train_frac"] = real(train_frac);
        m["valid_frac"] = real(valid_frac);
        m["test_frac"] = real(test_frac);
        m["inductive_node_type"] = inductive_node_type;
        m["epochs"] = std::to_string(epochs);
        m["lr"] = real(lr);
        m["gamma"] = real(gamma);
        m["q"] = std::to_string(q);
        m["holdout"] = std::to_string(holdout);
        m["anchor_strategy"] = anchor_strategy;
        m["k"] = std::to_string(k);
        m["seed"] = std::to_string(seed);
        m["patience"] = std::to_string(patience);
        m["resample_holdout"] = resample_holdout ? "true" : "false";
        m["augment"] = augment;
        m["normalize_original_edges"] = normalize_original_edges ? "true" : "false";
        m["d"] = std::to_string(hidden);
        m["L"] = std::to_string(layers);
        m["aggregation"] = aggregation;
        m["pagerank_damping"] = real(pagerank_damping);
        m["community_inner"] = community_inner;
        m["labels_cache"] = labels_cache;
        m["runs"] = std::to_string(runs);
        return m;
    }

    void set(const std::string& key, const std::string& value) {
        const auto to_u64 = [&](const std::string& v) -> std::uint64_t {
            try {
                return std::stoull(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
            }
        };
        const auto to_real = [&](const std::string& v) -> double {
            try {
                return std::stod(v);
            } catch (const std::exception&) {
                throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
            }
        };
        const auto to_bool = [&](const std::string& v) -> bool {
            if (v == "true" || v == "1") return true;
            if (v == "false" || v == "0") return false;
            throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
        };
        if (key == "edges") edges = value;
        else if (key == "features") features = value;
        else if (key == "node_types") node_types = value;
        else if (key == "dataset_name") dataset_name = value;
        else if (key == "mode") mode = value;
        else if (key == "train_frac") train_frac = to_real(value);
        else if (key == "valid_frac") valid_frac = to_real(value);
        else if (key == "test_frac") test_frac = to_real(value);
        else if (key == "inductive_node_type") inductive_node_type = value;
        else if (key == "epochs") epochs = to_u64(value);
        else if (key == "lr") lr = to_real(value);
        else if (key == "gamma") gamma = to_real(value);
        else if (key == "q") q = to_u64(value);
        else if (key == "holdout") holdout = to_u64(value);
        else if (key == "anchor_strategy") anchor_strategy = value;
        else if (key == "k") k = to_u64(value);
        else if (key == "seed") seed = to_u64(value);
        else if (key == "patience") patience = to_u64(value);
        else if (key == "resample_holdout") resample_holdout = to_bool(value);
        else if (key == "augment") augment = value;
        else if (key == "normalize_original_edges") normalize_original_edges = to_bool(value);
        else if (key == "d" || key == "hidden") hidden = to_u64(value);
        else if (key == "L" || key == "layers") layers = to_u64(value);
        else if (key == "aggregation") aggregation = value;
        else if (key == "pagerank_damping") pagerank_damping = to_real(value);
        else if (key == "community_inner") community_inner = value;
        else if (key == "labels_cache") labels_cache = value;
        else if (key == "runs") runs = to_u64(value);
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }

    /// key=value lines, '#' comments.
    void load_file(const std::string& path) {
        const std::string text = io::read_file(path);
        std::istringstream in(text);
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                            ": expected key=value");
            set(line.substr(0, eq), line.substr(eq + 1));
        }
    }

    void save_file(const std::string& path) const {
        std::string out;
        for (const auto& [k2, v] : to_map()) out += k2 + "=" + v + "\n";
        io::atomic_write(path, out);
    }

    DatasetBundle bundle() const { return {edges, features, node_types, dataset_name}; }

    SplitSpec split_spec(const Graph& g) const {
        SplitSpec spec;
        if (mode == "inductive") spec.mode = SplitMode::InductiveNode;
        else if (mode == "transductive") spec.mode = SplitMode::TransductiveEdge;
        else throw std::invalid_argument("config: mode must be inductive or transductive");
        spec.train_frac = train_frac;
        spec.valid_frac = valid_frac;
        spec.test_frac = test_frac;
        spec.seed = seed;
        if (!inductive_node_type.empty()) {
            const auto& names = g.node_type_names();
            for (std::size_t t = 0; t < names.size(); ++t)
                if (names[t] == inductive_node_type) {
                    spec.inductive_node_type = static_cast<int>(t);
                    break;
                }
            if (!spec.inductive_node_type)
                throw std::invalid_argument("config: unknown node type '" + inductive_node_type + "'");
        }
        return spec;
    }

    TrainConfig train_config(const SplitSpec& spec) const {
        TrainConfig t;
        t.epochs = epochs;
        t.lr = lr;
        t.gamma = gamma;
        t.q = q;
        t.holdout = holdout;
        t.anchor_strategy = anchor_strategy_from_string(anchor_strategy);
        t.k = k;
        t.seed = seed;
        t.patience = patience;
        t.resample_holdout = resample_holdout;
        t.augment = augment_mode_from_string(augment);
        t.normalize_original_edges = normalize_original_edges;
        t.hidden = hidden;
        t.layers = layers;
        if (aggregation != "sum")
            throw std::invalid_argument("config: aggregation must be sum");
        if (spec.mode == SplitMode::InductiveNode) t.holdout_node_type = spec.inductive_node_type;
        t.pagerank_damping = pagerank_damping;
        if (community_inner == "degree") t.community_inner = CommunityInner::Degree;
        else if (community_inner == "random") t.community_inner = CommunityInner::Random;
        else throw std::invalid_argument("config: community_inner must be degree or random");
        t.validate();
        return t;
    }

    Hyper hyper() const {
        Hyper h;
        h.k = k;
        h.hidden = hidden;
        h.layers = layers;
        h.gamma = gamma;
        h.q = q;
        h.aggregation = aggregation;
        h.normalize_original_edges = normalize_original_edges;
        return h;
    }
};

} // namespace leap
