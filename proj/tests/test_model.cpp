#include <catch2/catch_amalgamated.hpp>

#include "leap/model.hpp"
#include "leap/training.hpp"

using namespace leap;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * (2.0 * rng.next_real() - 1.0);
    return m;
}

ModelParams tiny_params(std::size_t k, std::size_t d_in, std::size_t hidden, std::size_t layers,
                        std::size_t node_types = 1, std::size_t edge_types = 1,
                        std::uint64_t seed = 1) {
    Hyper h;
    h.k = k;
    h.hidden = hidden;
    h.layers = layers;
    return ModelParams::init(h, d_in, node_types, edge_types, seed);
}

} // namespace

TEST_CASE("linker saturation and zero cases", "[model]") {
    auto p = tiny_params(3, 2, 4, 1);
    // W = 0, b = 0 -> every score 0.5.
    p.value(p.linker_w(0)).setZero();
    p.value(p.linker_b(0)).setZero();
    Tape tape;
    auto sp = stage(tape, p);
    Matrix x(2, 2);
    x << 1.0, -1.0, 0.5, 2.0;
    std::vector<int> types{0, 0};
    auto w = link(tape, p, sp, tape.leaf(x), types);
    CHECK(tape.value(w).minCoeff() == 0.5);
    CHECK(tape.value(w).maxCoeff() == 0.5);

    // Large bias saturates its column.
    auto p2 = tiny_params(3, 2, 4, 1);
    p2.value(p2.linker_w(0)).setZero();
    p2.value(p2.linker_b(0)).setZero();
    p2.value(p2.linker_b(0))(0, 1) = 30.0;
    Tape t2;
    auto sp2 = stage(t2, p2);
    auto w2 = link(t2, p2, sp2, t2.leaf(x), types);
    CHECK(t2.value(w2)(0, 1) > 0.999999);
    CHECK(t2.value(w2)(1, 1) > 0.999999);

    // Single feature x=1, W=2, b=-2 -> sigmoid(0) = 0.5.
    auto p3 = tiny_params(1, 1, 4, 1);
    p3.value(p3.linker_w(0))(0, 0) = 2.0;
    p3.value(p3.linker_b(0))(0, 0) = -2.0;
    Tape t3;
    auto sp3 = stage(t3, p3);
    Matrix one(1, 1);
    one << 1.0;
    std::vector<int> one_type{0};
    auto w3 = link(t3, p3, sp3, t3.leaf(one), one_type);
    CHECK(t3.value(w3)(0, 0) == 0.5);
}

TEST_CASE("linker uses type-specific parameters", "[model]") {
    auto p = tiny_params(2, 1, 4, 1, /*node_types=*/2);
    p.value(p.linker_w(0)).setZero();
    p.value(p.linker_b(0)).setZero();
    p.value(p.linker_w(1)).setZero();
    p.value(p.linker_b(1)).setConstant(30.0);
    Tape tape;
    auto sp = stage(tape, p);
    Matrix x = Matrix::Ones(2, 1);
    std::vector<int> types{0, 1};
    auto w = link(tape, p, sp, tape.leaf(x), types);
    CHECK(tape.value(w)(0, 0) == 0.5);
    CHECK(tape.value(w)(1, 0) > 0.999999);

    std::vector<int> bad{0, 7};
    CHECK_THROWS_AS(link(tape, p, sp, tape.leaf(x), bad), std::invalid_argument);
}

TEST_CASE("augmented adjacency construction", "[model]") {
    auto g = build_graph({{0, 1}, {1, 2}}, 3, Matrix::Zero(3, 2));
    AnchorSet anchors;
    anchors.ids = {0, 2};

    // No newcomers: augmentation layer absent, plain GNN.
    auto none = build_augmented(g, 0, anchors, AugmentMode::Learned);
    CHECK(none.augmented == nullptr);

    // One newcomer, two anchors: 2k directed entries.
    auto one = build_augmented(g, 1, anchors, AugmentMode::Learned);
    REQUIRE(one.augmented != nullptr);
    CHECK(one.augmented->nnz() == 4);
    CHECK(one.augmented->tensor_weighted());

    // Ablation: no augmentation even with newcomers present.
    auto off = build_augmented(g, 1, anchors, AugmentMode::None);
    CHECK(off.augmented == nullptr);

    // Unweighted ablation keeps the edges with constant weight 1.
    auto flat = build_augmented(g, 1, anchors, AugmentMode::Unweighted);
    REQUIRE(flat.augmented != nullptr);
    CHECK_FALSE(flat.augmented->tensor_weighted());
    CHECK(flat.augmented->nnz() == 4);

    AnchorSet bad;
    bad.ids = {5};
    CHECK_THROWS_AS(build_augmented(g, 1, bad, AugmentMode::Learned), std::invalid_argument);
}

TEST_CASE("encode identity and zero configurations", "[model]") {
    auto g = build_graph({{0, 1}, {1, 2}}, 3, Matrix::Zero(3, 2));
    AnchorSet anchors;
    anchors.ids = {0};

    // All weights zero -> Z = 0.
    auto p = tiny_params(1, 2, 2, 1);
    for (auto& item : p.items) item.value.setZero();
    Tape tape;
    auto sp = stage(tape, p);
    Matrix x(3, 2);
    x << 1, 2, 3, 4, 5, 6;
    auto adj = build_augmented(g, 0, anchors, AugmentMode::None);
    auto z = encode(tape, p, sp, tape.leaf(x), adj);
    CHECK(tape.value(z).cwiseAbs().maxCoeff() == 0.0);

    // L=1, self = I, neighbor = 0, nonnegative input -> Z = X.
    auto p2 = tiny_params(1, 2, 2, 1);
    p2.value(p2.orig_self(0)) = Matrix::Identity(2, 2);
    p2.value(p2.orig_rel(0, 0)).setZero();
    Tape t2;
    auto sp2 = stage(t2, p2);
    auto z2 = encode(t2, p2, sp2, t2.leaf(x), adj);
    CHECK(t2.value(z2) == x);
}

TEST_CASE("encode aggregates neighbors per the layer rule", "[model]") {
    // 3-node path, L=1, self = 0, neighbor = I, basis features:
    // row 1 = x_0 + x_2.
    auto g = build_graph({{0, 1}, {1, 2}}, 3, Matrix::Identity(3, 3));
    auto p = tiny_params(1, 3, 3, 1);
    p.value(p.orig_self(0)).setZero();
    p.value(p.orig_rel(0, 0)) = Matrix::Identity(3, 3);
    AnchorSet anchors;
    anchors.ids = {1};
    Tape tape;
    auto sp = stage(tape, p);
    auto adj = build_augmented(g, 0, anchors, AugmentMode::None);
    auto z = encode(tape, p, sp, tape.leaf(Matrix(Matrix::Identity(3, 3))), adj);
    Matrix expected(3, 3);
    expected << 0, 1, 0, 1, 0, 1, 0, 1, 0; // ReLU passthrough, all nonnegative
    CHECK(tape.value(z) == expected);
}

TEST_CASE("decode is the pairwise dot product", "[model]") {
    Tape tape;
    Matrix z(3, 2);
    z << 1, 0, 1, 0, 1, 2;
    auto zt = tape.leaf(z);
    auto s = decode(tape, zt, {{0, 1}, {0, 2}, {1, 2}});
    CHECK(tape.value(s)(0, 0) == 1.0); // identical unit rows
    CHECK(tape.value(s)(1, 0) == 1.0);

    Matrix z2(2, 2);
    z2 << 1, 2, 3, -1;
    auto s2 = decode(tape, tape.leaf(z2), {{0, 1}, {1, 0}});
    CHECK(tape.value(s2)(0, 0) == 1.0); // (1,2).(3,-1) = 1
    CHECK(tape.value(s2)(1, 0) == tape.value(s2)(0, 0)); // symmetry

    Matrix z3(2, 2);
    z3 << 1, 0, 0, 1;
    auto s3 = decode(tape, tape.leaf(z3), {{0, 1}});
    CHECK(tape.value(s3)(0, 0) == 0.0); // orthogonal
}

TEST_CASE("single-type heterogeneous path equals homogeneous output bit for bit", "[model]") {
    // A one-type, one-relation graph exercises the same generic code path the
    // heterogeneous case uses; its output must match the direct dense formula.
    Rng rng(7);
    auto g = build_graph({{0, 1}, {1, 2}, {2, 3}}, 4, random_matrix(rng, 4, 3));
    auto p = tiny_params(2, 3, 3, 2);
    AnchorSet anchors;
    anchors.ids = {1, 2};

    Tape tape;
    auto sp = stage(tape, p);
    Matrix x_all(5, 3);
    x_all.topRows(4) = g.features();
    x_all.row(4) = random_matrix(rng, 1, 3);
    auto x = tape.leaf(x_all);
    std::vector<int> types{0};
    auto w_tilde = link(tape, p, sp, tape.gather_rows(x, {4}), types);
    auto adj = build_augmented(g, 1, anchors, AugmentMode::Learned);
    auto z = encode(tape, p, sp, x, adj, w_tilde);

    // Direct computation of the linker row.
    const Matrix& W = p.value(p.linker_w(0));
    const Matrix& b = p.value(p.linker_b(0));
    Matrix expect_w = x_all.row(4) * W.transpose() + b;
    for (Eigen::Index j = 0; j < expect_w.cols(); ++j)
        expect_w(0, j) = 1.0 / (1.0 + std::exp(-expect_w(0, j)));
    CHECK(tape.value(w_tilde) == expect_w);
    CHECK(tape.value(z).rows() == 5);
}

TEST_CASE("encode is permutation equivariant", "[model]") {
    Rng rng(11);
    Matrix feats = random_matrix(rng, 5, 3);
    auto g1 = build_graph({{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}}, 5, feats);

    // Relabel via permutation sigma.
    std::vector<NodeId> sigma{2, 0, 4, 1, 3}; // new id of old node i
    Matrix feats2(5, 3);
    for (std::size_t i = 0; i < 5; ++i) feats2.row(sigma[i]) = feats.row(static_cast<Eigen::Index>(i));
    std::vector<std::pair<NodeId, NodeId>> edges2;
    for (auto [u, v] : g1.edges()) edges2.emplace_back(sigma[u], sigma[v]);
    auto g2 = build_graph(edges2, 5, feats2);

    auto p = tiny_params(1, 3, 4, 2);
    AnchorSet anchors;
    anchors.ids = {0};
    AnchorSet anchors2;
    anchors2.ids = {sigma[0]};

    Tape t1, t2;
    auto sp1 = stage(t1, p);
    auto sp2 = stage(t2, p);
    auto z1 = encode(t1, p, sp1, t1.leaf(g1.features()),
                     build_augmented(g1, 0, anchors, AugmentMode::None));
    auto z2 = encode(t2, p, sp2, t2.leaf(g2.features()),
                     build_augmented(g2, 0, anchors2, AugmentMode::None));
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(t1.value(z1).row(static_cast<Eigen::Index>(i)) ==
              t2.value(z2).row(sigma[i]));
}

TEST_CASE("gradients reach the linker through the augmented edges", "[model][grad]") {
    // gamma = 0: the only path into the linker weights is the edge-weight
    // tensor inside spmm. Finite differences on one linker entry must match.
    // Positive weights and features keep every ReLU alive, so the gradient
    // path cannot die by chance.
    Rng rng(13);
    Matrix feats = random_matrix(rng, 3, 2).cwiseAbs();
    feats.array() += 0.1;
    auto g = build_graph({{0, 1}, {1, 2}}, 3, feats);
    AnchorSet anchors;
    anchors.ids = {0, 1};

    auto run = [&](const ModelParams& p, Tape* tape_out, StagedParams* sp_out) {
        Tape local;
        Tape& tape = tape_out ? *tape_out : local;
        auto sp = stage(tape, p);
        Matrix x_all(4, 2);
        x_all.topRows(3) = g.features();
        x_all.row(3) << 0.3, 0.7;
        auto x = tape.leaf(x_all);
        std::vector<int> types{0};
        auto w_tilde = link(tape, p, sp, tape.gather_rows(x, {3}), types);
        auto adj = build_augmented(g, 1, anchors, AugmentMode::Learned);
        auto z = encode(tape, p, sp, x, adj, w_tilde);
        auto scores = decode(tape, z, {{3, 2}, {0, 2}});
        auto loss = tape.scale(tape.sum(tape.logsigmoid(scores)), -0.5);
        if (sp_out) *sp_out = sp;
        if (tape_out) return loss;
        return loss;
    };

    auto p = tiny_params(2, 2, 3, 2);
    // Positive, moderate weights: ReLUs stay alive, scores stay unsaturated.
    for (auto& item : p.items) item.value = 0.5 * item.value.cwiseAbs();
    Tape tape;
    StagedParams sp;
    auto loss = run(p, &tape, &sp);
    tape.backward(loss);
    const Matrix& analytic = tape.grad(sp.t[p.linker_w(0)]);
    CHECK(analytic.cwiseAbs().maxCoeff() > 0.0); // gradient actually flows

    const double eps = 1e-5;
    for (Eigen::Index i = 0; i < analytic.rows(); ++i)
        for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
            ModelParams up = p, dn = p;
            up.value(up.linker_w(0))(i, j) += eps;
            dn.value(dn.linker_w(0))(i, j) -= eps;
            Tape tu, td;
            StagedParams su, sd;
            const double fu = tu.value(run(up, &tu, &su))(0, 0);
            const double fd = td.value(run(dn, &td, &sd))(0, 0);
            const double numeric = (fu - fd) / (2 * eps);
            const double a = analytic(i, j);
            CHECK(std::abs(a - numeric) <= 1e-4 * std::max({1.0, std::abs(a), std::abs(numeric)}));
        }
}
