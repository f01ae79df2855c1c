#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>

#include "leap/checkpoint.hpp"
#include "leap/config.hpp"
#include "leap/dataset.hpp"
#include "leap/labels_cache.hpp"
#include "leap/synth.hpp"

using namespace leap;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        const auto tick = std::chrono::steady_clock::now().time_since_epoch().count();
        path = fs::temp_directory_path() /
               ("leap_io_" + std::to_string(tick) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

} // namespace

TEST_CASE("feature file round trip, binary and csv", "[io]") {
    TempDir tmp;
    Rng rng(1);
    Matrix m(5, 3);
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) m(i, j) = std::floor((2.0 * rng.next_real() - 1.0) * 1e4) / 1e4;
    save_features(tmp.file("f.bin"), m);
    Matrix back = load_features(tmp.file("f.bin"));
    REQUIRE(back.rows() == 5);
    // 32-bit storage: equality after a float round trip.
    for (Eigen::Index i = 0; i < 5; ++i)
        for (Eigen::Index j = 0; j < 3; ++j)
            CHECK(back(i, j) == static_cast<double>(static_cast<float>(m(i, j))));

    write(tmp.file("f.csv"), "1.5,2\n-3,0.25\n");
    Matrix csv = load_features(tmp.file("f.csv"));
    CHECK(csv(1, 1) == 0.25);
    CHECK(csv.rows() == 2);

    write(tmp.file("ragged.csv"), "1,2\n3\n");
    CHECK_THROWS_AS(load_features(tmp.file("ragged.csv")), DataError);
}

TEST_CASE("dataset load: path graph from a two-line edge file", "[io]") {
    TempDir tmp;
    write(tmp.file("e.txt"), "0 1\n1 2\n");
    Matrix feats(3, 2);
    feats << 1, 0, 0, 1, 1, 1;
    save_features(tmp.file("f.bin"), feats);
    auto g = load_dataset({tmp.file("e.txt"), tmp.file("f.bin"), "", "p"});
    CHECK(g.num_nodes() == 3);
    CHECK(g.num_edges() == 2);
    CHECK(g.degree(1) == 2);
    CHECK_FALSE(g.is_heterogeneous());
}

TEST_CASE("dataset load: row count mismatch names both counts", "[io]") {
    TempDir tmp;
    write(tmp.file("e.txt"), "0 1\n1 2\n2 3\n");
    save_features(tmp.file("f.bin"), Matrix::Zero(3, 2)); // 4 nodes referenced, 3 rows
    try {
        load_dataset({tmp.file("e.txt"), tmp.file("f.bin"), "", "x"});
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("3") != std::string::npos);
        CHECK(msg.find("id 3") != std::string::npos);
    }
}

TEST_CASE("dataset load: heterogeneous flags from type files", "[io]") {
    TempDir tmp;
    write(tmp.file("e.txt"), "0 1 cites\n1 2 writes\n");
    save_features(tmp.file("f.bin"), Matrix::Zero(3, 1));
    write(tmp.file("t.txt"), "0 paper\n1 author\n2 paper\n");
    auto g = load_dataset({tmp.file("e.txt"), tmp.file("f.bin"), tmp.file("t.txt"), "x"});
    CHECK(g.num_node_types() == 2);
    CHECK(g.num_edge_types() == 2);
    CHECK(g.is_heterogeneous());
    CHECK(g.node_type_names()[g.node_type(1)] == "author");
}

TEST_CASE("dataset load: parse errors carry line numbers", "[io]") {
    TempDir tmp;
    write(tmp.file("bad.txt"), "0 1\nnot numbers\n");
    try {
        load_edge_list(tmp.file("bad.txt"));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    write(tmp.file("partial_types.txt"), "0 paper\n");
    write(tmp.file("e.txt"), "0 1\n");
    save_features(tmp.file("f.bin"), Matrix::Zero(2, 1));
    CHECK_THROWS_AS(load_dataset({tmp.file("e.txt"), tmp.file("f.bin"),
                                  tmp.file("partial_types.txt"), "x"}),
                    DataError);
}

TEST_CASE("graph write then load reproduces the canonical graph", "[io]") {
    TempDir tmp;
    auto data = generate_sbm({40, 2, 0.3, 0.05, 0.5, 5});
    save_edges(tmp.file("e.txt"), data.graph);
    save_features(tmp.file("f.bin"), data.graph.features());
    auto back = load_dataset({tmp.file("e.txt"), tmp.file("f.bin"), "", "sbm"});
    CHECK(back.num_nodes() == data.graph.num_nodes());
    CHECK(back.edges() == data.graph.edges());
    // Feature values survive up to the 32-bit storage round trip.
    for (Eigen::Index i = 0; i < 4; ++i)
        CHECK(back.features()(i, 0) ==
              static_cast<double>(static_cast<float>(data.graph.features()(i, 0))));
}

TEST_CASE("checkpoint round trip preserves names, shapes, values", "[io]") {
    TempDir tmp;
    Hyper h;
    h.k = 4;
    h.hidden = 8;
    h.layers = 2;
    auto params = ModelParams::init(h, 3, 2, 2, 11);
    save_checkpoint(tmp.file("m.ckpt"), params);
    auto items = load_checkpoint(tmp.file("m.ckpt"));
    REQUIRE(items.size() == params.items.size());
    auto restored = restore_params(h, 3, 2, 2, items);
    for (std::size_t i = 0; i < items.size(); ++i) {
        CHECK(restored.items[i].name == params.items[i].name);
        const Matrix& a = restored.items[i].value;
        const Matrix& b = params.items[i].value;
        REQUIRE(a.rows() == b.rows());
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c)
                CHECK(a(r, c) == static_cast<double>(static_cast<float>(b(r, c))));
    }

    // Wrong shape metadata is rejected.
    Hyper wrong = h;
    wrong.hidden = 16;
    CHECK_THROWS_AS(restore_params(wrong, 3, 2, 2, items), DataError);

    write(tmp.file("junk.ckpt"), "not a checkpoint");
    CHECK_THROWS_AS(load_checkpoint(tmp.file("junk.ckpt")), DataError);
}

TEST_CASE("config file round trip and overrides", "[io]") {
    TempDir tmp;
    RunConfig cfg;
    cfg.edges = "e.txt";
    cfg.features = "f.bin";
    cfg.k = 32;
    cfg.gamma = 0.125;
    cfg.augment = "unweighted";
    cfg.save_file(tmp.file("c.cfg"));

    RunConfig back;
    back.load_file(tmp.file("c.cfg"));
    CHECK(back.k == 32);
    CHECK(back.gamma == 0.125);
    CHECK(back.augment == "unweighted");
    CHECK(back.to_map() == cfg.to_map());

    write(tmp.file("bad.cfg"), "mystery=1\n");
    RunConfig other;
    CHECK_THROWS_AS(other.load_file(tmp.file("bad.cfg")), std::invalid_argument);

    CHECK_THROWS_AS(cfg.set("k", "many"), std::invalid_argument);
}

TEST_CASE("synth generator is deterministic and block-structured", "[io][synth]") {
    SbmConfig cfg;
    cfg.seed = 7;
    auto a = generate_sbm(cfg);
    auto b = generate_sbm(cfg);
    CHECK(a.graph.edges() == b.graph.edges());
    CHECK(a.graph.features() == b.graph.features());
    CHECK(a.block == b.block);

    // Intra edges dominate at these probabilities.
    std::size_t intra = 0;
    for (auto [u, v] : a.graph.edges())
        if (a.block[u] == a.block[v]) ++intra;
    CHECK(intra > a.graph.num_edges() * 8 / 10);

    // Feature means carry the block indicator.
    double mean_own = 0.0, mean_other = 0.0;
    for (std::size_t i = 0; i < 400; ++i) {
        mean_own += a.graph.features()(static_cast<Eigen::Index>(i), a.block[i]) / 400.0;
        mean_other += a.graph.features()(static_cast<Eigen::Index>(i), 1 - a.block[i]) / 400.0;
    }
    CHECK(mean_own == Catch::Approx(1.0).margin(0.1));
    CHECK(mean_other == Catch::Approx(0.0).margin(0.1));
}

TEST_CASE("atomic write leaves no temp file", "[io]") {
    TempDir tmp;
    io::atomic_write(tmp.file("x.txt"), "hello");
    CHECK(fs::exists(tmp.file("x.txt")));
    CHECK_FALSE(fs::exists(tmp.file("x.txt") + ".tmp"));
}

TEST_CASE("labels cache round trip and key sensitivity", "[io]") {
    TempDir tmp;
    auto g = build_graph({{0, 1}, {1, 2}, {2, 3}}, 4);
    AnchorSet anchors;
    anchors.ids = {0, 3};
    std::vector<NodeId> held{1, 2};
    auto labels = closeness_labels(g, held, anchors);
    const auto key = labels_cache_key(g, held, anchors);

    CHECK_FALSE(load_labels_cache(tmp.path.string(), key).has_value());
    save_labels_cache(tmp.path.string(), key, labels);
    auto back = load_labels_cache(tmp.path.string(), key);
    REQUIRE(back.has_value());
    CHECK(back->nodes == labels.nodes);
    CHECK(back->w == labels.w);

    // A different holdout yields a different key.
    std::vector<NodeId> other{1};
    CHECK(labels_cache_key(g, other, anchors) != key);
}

TEST_CASE("edge files allow comments and blank lines", "[io]") {
    TempDir tmp;
    write(tmp.file("e.txt"), "# header\n0 1\n\n# middle\n1 2\n");
    auto records = load_edge_list(tmp.file("e.txt"));
    REQUIRE(records.size() == 2);
    CHECK(records[1].u == 1);
    CHECK(records[1].v == 2);
}
