// Command-line surface: split, anchors, train, eval, synth.
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "leap/leap.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

json report_to_json(const leap::RunConfig& cfg, const leap::AggregateReport& agg) {
    json out;
    out["dataset"] = cfg.dataset_name;
    out["mode"] = cfg.mode;
    json runs = json::array();
    for (const auto& r : agg.runs)
        runs.push_back(json{{"seed", r.seed}, {"auc", r.auc}, {"ap", r.ap}});
    out["runs"] = runs;
    out["mean_auc"] = agg.mean_auc;
    out["std_auc"] = agg.std_auc;
    out["mean_ap"] = agg.mean_ap;
    out["std_ap"] = agg.std_ap;
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    leap::io::atomic_write(path, text);
}

void write_anchor_sidecar(const std::string& path, const leap::AnchorSet& anchors) {
    json j;
    j["strategy"] = leap::to_string(anchors.strategy);
    j["seed"] = anchors.seed;
    j["k"] = anchors.ids.size();
    j["ids"] = anchors.ids;
    write_text(path, j.dump(2) + "\n");
}

leap::AnchorSet read_anchor_sidecar(const std::string& path) {
    const json j = json::parse(leap::io::read_file(path));
    leap::AnchorSet a;
    a.strategy = leap::anchor_strategy_from_string(j.at("strategy").get<std::string>());
    a.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& id : j.at("ids")) a.ids.push_back(id.get<leap::NodeId>());
    return a;
}

std::string history_to_jsonl(const std::vector<leap::EpochRecord>& history) {
    std::string out;
    for (const auto& r : history) {
        json j;
        j["epoch"] = r.epoch;
        j["loss_total"] = r.loss_total;
        j["loss_gnn"] = r.loss_gnn;
        j["loss_mlp"] = r.loss_mlp;
        j["val_auc"] = r.val_auc;
        j["val_ap"] = r.val_ap;
        out += j.dump() + "\n";
    }
    return out;
}

/// Full pipeline for one seed: split, train, evaluate on the test set, and
/// write the run directory (config.resolved, checkpoint, anchors, history).
leap::RunMetrics run_one(const leap::RunConfig& base, std::uint64_t seed, const leap::Graph& graph,
                         const std::string& run_dir, bool quiet) {
    leap::RunConfig cfg = base;
    cfg.seed = seed;
    cfg.runs = 1;
    const leap::SplitSpec spec = cfg.split_spec(graph);
    const leap::Split split = leap::make_split(graph, spec);
    leap::TrainConfig tc = cfg.train_config(spec);
    if (!cfg.labels_cache.empty()) {
        const std::string dir = cfg.labels_cache;
        tc.label_source = [dir](const leap::Graph& g, std::span<const leap::NodeId> hold,
                                const leap::AnchorSet& anchors) {
            const auto key = leap::labels_cache_key(g, hold, anchors);
            if (auto hit = leap::load_labels_cache(dir, key)) return *hit;
            auto fresh = leap::closeness_labels(g, hold, anchors);
            leap::save_labels_cache(dir, key, fresh);
            return fresh;
        };
    }

    leap::TrainResult result = leap::train(graph, split, tc);
    const leap::EvalReport test = leap::evaluate(result.params, result.anchors, graph, split,
                                                 /*use_test_set=*/true, tc.augment, seed);

    fs::create_directories(run_dir);
    cfg.save_file(run_dir + "/config.resolved");
    leap::save_checkpoint(run_dir + "/checkpoint.ckpt", result.params);
    write_anchor_sidecar(run_dir + "/anchors.json", result.anchors);
    write_text(run_dir + "/history.jsonl", history_to_jsonl(result.history));
    if (!quiet)
        std::cout << "seed " << seed << ": test auc=" << test.auc << " ap=" << test.ap << " ("
                  << result.history.size() << " epochs, best epoch " << result.best_epoch << ")\n";
    return {seed, test.auc, test.ap};
}

leap::Graph load_graph(const leap::RunConfig& cfg) {
    leap::Graph g = leap::load_dataset(cfg.bundle());
    if (g.duplicate_edges_dropped() > 0)
        std::cerr << "warning: dropped " << g.duplicate_edges_dropped()
                  << " duplicate edge(s) during ingestion\n";
    return g;
}

void add_dataset_flags(CLI::App* cmd, leap::RunConfig& cfg, bool features_required) {
    auto* e = cmd->add_option("--edges", cfg.edges, "edge list file (src dst [type] per line)");
    e->required();
    auto* f = cmd->add_option("--features", cfg.features, "feature file (binary or CSV)");
    if (features_required) f->required();
    cmd->add_option("--node-types", cfg.node_types, "node type file (id name per line)");
    cmd->add_option("--dataset-name", cfg.dataset_name, "name used in reports");
}

void add_split_flags(CLI::App* cmd, leap::RunConfig& cfg) {
    cmd->add_option("--mode", cfg.mode, "inductive | transductive")
        ->check(CLI::IsMember({"inductive", "transductive"}));
    cmd->add_option("--train-frac", cfg.train_frac, "train fraction");
    cmd->add_option("--valid-frac", cfg.valid_frac, "validation fraction");
    cmd->add_option("--test-frac", cfg.test_frac, "test fraction");
    cmd->add_option("--inductive-node-type", cfg.inductive_node_type,
                    "restrict newcomers to this node type");
}

void add_train_flags(CLI::App* cmd, leap::RunConfig& cfg) {
    cmd->add_option("--epochs", cfg.epochs, "maximum training epochs");
    cmd->add_option("--lr", cfg.lr, "Adam learning rate");
    cmd->add_option("--gamma", cfg.gamma, "closeness loss weight");
    cmd->add_option("--q", cfg.q, "negatives per positive");
    cmd->add_option("--holdout", cfg.holdout, "per-epoch holdout size (0 = 10% of train nodes)");
    cmd->add_option("--anchor-strategy", cfg.anchor_strategy,
                    "random | degree | pagerank | community | stratified");
    cmd->add_option("--k", cfg.k, "number of anchors");
    cmd->add_option("--patience", cfg.patience, "early-stopping patience on validation AUC");
    cmd->add_flag_callback("--no-resample-holdout",
                           [&cfg]() { cfg.resample_holdout = false; },
                           "draw the holdout once instead of every epoch");
    cmd->add_option("--augment", cfg.augment, "learned | unweighted | none")
        ->check(CLI::IsMember({"learned", "unweighted", "none"}));
    cmd->add_flag_callback("--normalize-edges",
                           [&cfg]() { cfg.normalize_original_edges = true; },
                           "symmetric degree normalization of original edge weights");
    cmd->add_option("--hidden", cfg.hidden, "embedding width");
    cmd->add_option("--layers", cfg.layers, "message passing layers");
    cmd->add_option("--pagerank-damping", cfg.pagerank_damping, "PageRank damping factor");
    cmd->add_option("--community-inner", cfg.community_inner,
                    "inner strategy for community anchors: degree | random")
        ->check(CLI::IsMember({"degree", "random"}));
    cmd->add_option("--labels-cache", cfg.labels_cache,
                    "directory for the closeness-label cache");
    cmd->add_option("--runs", cfg.runs, "train/evaluate this many seeds and aggregate");
}

int cmd_synth(const std::string& out_dir, const leap::SbmConfig& sbm) {
    const leap::SbmData data = leap::generate_sbm(sbm);
    fs::create_directories(out_dir);
    leap::save_edges(out_dir + "/edges.txt", data.graph);
    leap::save_features(out_dir + "/features.bin", data.graph.features());
    json meta;
    meta["nodes"] = sbm.nodes;
    meta["blocks"] = sbm.blocks;
    meta["p_intra"] = sbm.p_intra;
    meta["p_inter"] = sbm.p_inter;
    meta["noise"] = sbm.noise;
    meta["seed"] = sbm.seed;
    meta["num_edges"] = data.graph.num_edges();
    write_text(out_dir + "/meta.json", meta.dump(2) + "\n");
    json blocks = data.block;
    write_text(out_dir + "/blocks.json", blocks.dump() + "\n");
    std::cout << "wrote " << out_dir << ": " << sbm.nodes << " nodes, " << data.graph.num_edges()
              << " edges\n";
    return kExitOk;
}

int cmd_split(const leap::RunConfig& cfg, const std::string& out_dir) {
    const leap::Graph graph = load_graph(cfg);
    const leap::SplitSpec spec = cfg.split_spec(graph);
    const leap::Split split = leap::make_split(graph, spec);
    fs::create_directories(out_dir);

    // Train edges in original ids.
    std::vector<leap::NodeId> back(split.train_graph.num_nodes());
    for (std::size_t u = 0; u < split.remap.size(); ++u)
        if (split.remap[u] >= 0) back[split.remap[u]] = static_cast<leap::NodeId>(u);
    std::string train_edges;
    for (std::size_t e = 0; e < split.train_graph.num_edges(); ++e) {
        const auto [u, v] = split.train_graph.edges()[e];
        train_edges += std::to_string(back[u]);
        train_edges += ' ';
        train_edges += std::to_string(back[v]);
        if (graph.num_edge_types() > 1) {
            train_edges += ' ';
            train_edges += graph.edge_type_names()[split.train_graph.edge_types()[e]];
        }
        train_edges += '\n';
    }
    write_text(out_dir + "/train_edges.txt", train_edges);

    const auto pair_file = [&](const std::vector<std::pair<leap::NodeId, leap::NodeId>>& pairs) {
        std::string s;
        for (const auto& [a, b] : pairs) s += std::to_string(a) + " " + std::to_string(b) + "\n";
        return s;
    };
    write_text(out_dir + "/valid_pairs.txt", pair_file(split.valid_pairs));
    write_text(out_dir + "/test_pairs.txt", pair_file(split.test_pairs));
    if (spec.mode == leap::SplitMode::InductiveNode) {
        const auto id_file = [](const std::vector<leap::NodeId>& ids) {
            std::string s;
            for (leap::NodeId u : ids) s += std::to_string(u) + "\n";
            return s;
        };
        write_text(out_dir + "/valid_nodes.txt", id_file(split.valid_nodes));
        write_text(out_dir + "/test_nodes.txt", id_file(split.test_nodes));
    }
    json summary;
    summary["dataset"] = cfg.dataset_name;
    summary["mode"] = cfg.mode;
    summary["seed"] = cfg.seed;
    summary["train_nodes"] = split.train_graph.num_nodes();
    summary["train_edges"] = split.train_graph.num_edges();
    summary["valid_pairs"] = split.valid_pairs.size();
    summary["test_pairs"] = split.test_pairs.size();
    if (spec.mode == leap::SplitMode::InductiveNode) {
        summary["valid_nodes"] = split.valid_nodes.size();
        summary["test_nodes"] = split.test_nodes.size();
    }
    write_text(out_dir + "/split.json", summary.dump(2) + "\n");
    std::cout << summary.dump(2) << "\n";
    return kExitOk;
}

int cmd_anchors(const leap::RunConfig& cfg, const std::string& strategy, std::size_t k,
                const std::string& out_file) {
    const leap::Graph graph = load_graph(cfg);
    leap::AnchorOptions opts;
    opts.pagerank_damping = cfg.pagerank_damping;
    opts.community_inner =
        cfg.community_inner == "random" ? leap::CommunityInner::Random : leap::CommunityInner::Degree;
    const leap::AnchorSet anchors =
        leap::select_anchors(graph, k, leap::anchor_strategy_from_string(strategy), cfg.seed, opts);
    const json ids = anchors.ids;
    if (out_file.empty()) std::cout << ids.dump() << "\n";
    else write_text(out_file, ids.dump() + "\n");
    return kExitOk;
}

int cmd_train(const leap::RunConfig& cfg, const std::string& out_dir) {
    const leap::Graph graph = load_graph(cfg);
    fs::create_directories(out_dir);
    cfg.save_file(out_dir + "/config.resolved");

    std::vector<leap::RunMetrics> runs;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        const std::uint64_t seed = cfg.seed + r;
        const std::string run_dir =
            cfg.runs == 1 ? out_dir : out_dir + "/run-" + std::to_string(seed);
        runs.push_back(run_one(cfg, seed, graph, run_dir, /*quiet=*/false));
    }
    const leap::AggregateReport agg = leap::aggregate_runs(runs);
    const json report = report_to_json(cfg, agg);
    write_text(out_dir + "/metrics.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << "\n";
    return kExitOk;
}

int cmd_eval(const std::string& model_dir, std::optional<std::uint64_t> seed_override,
             bool use_valid, const std::string& out_file) {
    leap::RunConfig cfg;
    cfg.load_file(model_dir + "/config.resolved");
    const leap::Graph graph = load_graph(cfg);
    const leap::SplitSpec spec = cfg.split_spec(graph);
    const leap::Split split = leap::make_split(graph, spec);

    const auto items = leap::load_checkpoint(model_dir + "/checkpoint.ckpt");
    const leap::ModelParams params =
        leap::restore_params(cfg.hyper(), graph.feature_dim(), graph.num_node_types(),
                             graph.num_edge_types(), items);
    const leap::AnchorSet anchors = read_anchor_sidecar(model_dir + "/anchors.json");

    const std::uint64_t seed = seed_override.value_or(cfg.seed);
    const leap::EvalReport report =
        leap::evaluate(params, anchors, graph, split, /*use_test_set=*/!use_valid,
                       leap::augment_mode_from_string(cfg.augment), seed);
    const leap::AggregateReport agg = leap::aggregate_runs({{seed, report.auc, report.ap}});
    json j = report_to_json(cfg, agg);
    j["n_pos"] = report.n_pos;
    j["n_neg"] = report.n_neg;
    j["set"] = use_valid ? "valid" : "test";
    if (!out_file.empty()) write_text(out_file, j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LEAP: inductive link prediction with learned anchor augmentation"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate the planted-block benchmark dataset");
    leap::SbmConfig sbm;
    std::string synth_out = "synth";
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--seed", sbm.seed, "generator seed");
    synth->add_option("--nodes", sbm.nodes, "node count");
    synth->add_option("--blocks", sbm.blocks, "block count");
    synth->add_option("--p-intra", sbm.p_intra, "intra-block edge probability");
    synth->add_option("--p-inter", sbm.p_inter, "inter-block edge probability");
    synth->add_option("--noise", sbm.noise, "feature noise sigma");

    // split
    auto* split_cmd = app.add_subcommand("split", "emit a deterministic train/valid/test partition");
    leap::RunConfig split_cfg;
    std::string split_out = "split_out";
    add_dataset_flags(split_cmd, split_cfg, /*features_required=*/false);
    add_split_flags(split_cmd, split_cfg);
    split_cmd->add_option("--seed", split_cfg.seed, "partition seed");
    split_cmd->add_option("--out", split_out, "output directory");

    // anchors
    auto* anchors_cmd = app.add_subcommand("anchors", "select anchors and emit a JSON id list");
    leap::RunConfig anchors_cfg;
    std::string anchors_strategy = "degree";
    std::size_t anchors_k = 0;
    std::string anchors_out;
    add_dataset_flags(anchors_cmd, anchors_cfg, /*features_required=*/false);
    anchors_cmd->add_option("--strategy", anchors_strategy,
                            "random | degree | pagerank | community | stratified")
        ->check(CLI::IsMember({"random", "degree", "pagerank", "community", "stratified"}));
    anchors_cmd->add_option("--k", anchors_k, "number of anchors")->required();
    anchors_cmd->add_option("--seed", anchors_cfg.seed, "sampling seed");
    anchors_cmd->add_option("--damping", anchors_cfg.pagerank_damping, "PageRank damping");
    anchors_cmd->add_option("--inner", anchors_cfg.community_inner,
                            "inner strategy for community anchors")
        ->check(CLI::IsMember({"degree", "random"}));
    anchors_cmd->add_option("--out", anchors_out, "write the JSON list here instead of stdout");

    // train
    auto* train_cmd = app.add_subcommand("train", "train and checkpoint a model");
    leap::RunConfig train_cfg;
    std::string train_config_file;
    std::string train_out = "run";
    train_cmd->add_option("--config", train_config_file, "key=value configuration file")
        ->check(CLI::ExistingFile);
    add_dataset_flags(train_cmd, train_cfg, /*features_required=*/true);
    add_split_flags(train_cmd, train_cfg);
    add_train_flags(train_cmd, train_cfg);
    train_cmd->add_option("--seed", train_cfg.seed, "base seed");
    train_cmd->add_option("--out", train_out, "output directory");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpointed run");
    std::string eval_model;
    std::string eval_out;
    std::optional<std::uint64_t> eval_seed;
    bool eval_valid = false;
    eval_cmd->add_option("--model", eval_model, "run directory produced by train")->required();
    eval_cmd->add_option("--seed", eval_seed, "override the negative-sampling seed");
    eval_cmd->add_flag("--valid", eval_valid, "evaluate the validation pairs instead of test");
    eval_cmd->add_option("--out", eval_out, "also write the report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // usage text, exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (*synth) return cmd_synth(synth_out, sbm);
        if (*split_cmd) return cmd_split(split_cfg, split_out);
        if (*anchors_cmd) return cmd_anchors(anchors_cfg, anchors_strategy, anchors_k, anchors_out);
        if (*train_cmd) {
            // precedence: defaults < config file < command-line flags
            leap::RunConfig merged;
            if (!train_config_file.empty()) merged.load_file(train_config_file);
            const leap::RunConfig defaults;
            const auto default_map = defaults.to_map();
            static const std::map<std::string, std::string> flag_of_key{
                {"edges", "--edges"}, {"features", "--features"},
                {"node_types", "--node-types"}, {"dataset_name", "--dataset-name"},
                {"mode", "--mode"}, {"train_frac", "--train-frac"},
                {"valid_frac", "--valid-frac"}, {"test_frac", "--test-frac"},
                {"inductive_node_type", "--inductive-node-type"}, {"epochs", "--epochs"},
                {"lr", "--lr"}, {"gamma", "--gamma"}, {"q", "--q"}, {"holdout", "--holdout"},
                {"anchor_strategy", "--anchor-strategy"}, {"k", "--k"}, {"seed", "--seed"},
                {"patience", "--patience"}, {"augment", "--augment"}, {"d", "--hidden"},
                {"L", "--layers"}, {"pagerank_damping", "--pagerank-damping"},
                {"community_inner", "--community-inner"}, {"labels_cache", "--labels-cache"},
                {"runs", "--runs"}};
            for (const auto& [key, value] : train_cfg.to_map()) {
                const auto it = flag_of_key.find(key);
                const bool flag_given = it != flag_of_key.end() && train_cmd->count(it->second) > 0;
                if (flag_given || default_map.at(key) != value) merged.set(key, value);
            }
            return cmd_train(merged, train_out);
        }
        if (*eval_cmd) return cmd_eval(eval_model, eval_seed, eval_valid, eval_out);
    } catch (const leap::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
