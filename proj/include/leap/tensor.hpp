#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "leap/matrix.hpp"

namespace leap {

/// Row-compressed sparse adjacency used for neighborhood aggregation.
/// Entry weights are either fixed constants or live references into an
/// activation tensor (src holds flat indices into it), which is what lets
/// gradients flow through predicted edge weights.
struct SparseAdj {
    std::size_t rows = 0, cols = 0;
    std::vector<std::size_t> offsets; // rows + 1
    std::vector<std::size_t> col;
    std::vector<double> weight;       // used when src is empty
    std::vector<std::size_t> src;     // flat indices into the weight tensor

    std::size_t nnz() const { return col.size(); }
    bool tensor_weighted() const { return !src.empty(); }

    static SparseAdj identity(std::size_t n) {
        SparseAdj s;
        s.rows = s.cols = n;
        s.offsets.resize(n + 1);
        s.col.resize(n);
        s.weight.assign(n, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            s.offsets[i] = i;
            s.col[i] = i;
        }
        s.offsets[n] = n;
        return s;
    }

    /// Builds from (row, col, weight) triplets; rows need not be sorted.
    static SparseAdj from_triplets(std::size_t rows, std::size_t cols,
                                   const std::vector<std::tuple<std::size_t, std::size_t, double>>& t) {
        SparseAdj s;
        s.rows = rows;
        s.cols = cols;
        s.offsets.assign(rows + 1, 0);
        for (const auto& [r, c, w] : t) {
            if (r >= rows || c >= cols) throw std::invalid_argument("SparseAdj: index out of range");
            ++s.offsets[r + 1];
        }
        for (std::size_t i = 0; i < rows; ++i) s.offsets[i + 1] += s.offsets[i];
        s.col.resize(t.size());
        s.weight.resize(t.size());
        std::vector<std::size_t> cursor(s.offsets.begin(), s.offsets.end() - 1);
        for (const auto& [r, c, w] : t) {
            if (!std::isfinite(w)) throw std::invalid_argument("SparseAdj: non-finite weight");
            s.col[cursor[r]] = c;
            s.weight[cursor[r]] = w;
            ++cursor[r];
        }
        return s;
    }
};

/// Handle into a Tape node.
struct Tensor {
    int id = -1;
    std::size_t rows = 0, cols = 0;

    bool valid() const { return id >= 0; }
};

/// Eager reverse-mode differentiation tape. Forward ops execute immediately
/// and record what backward needs; backward replays in exact reverse order
/// and accumulates gradients additively. A tape is single-threaded; run
/// independent tapes for concurrent work.
class Tape {
public:
    Tensor leaf(Matrix value, bool requires_grad = false) {
        return push(Op::Leaf, std::move(value), {}, requires_grad);
    }

    Tensor matmul(Tensor a, Tensor b) {
        require(shape(a).second == shape(b).first, "matmul: inner dimensions differ");
        return push(Op::MatMul, val(a) * val(b), {a, b});
    }

    /// a * b^T; the natural orientation for row-major weight application.
    Tensor matmul_nt(Tensor a, Tensor b) {
        require(shape(a).second == shape(b).second, "matmul_nt: inner dimensions differ");
        return push(Op::MatMulNT, val(a) * val(b).transpose(), {a, b});
    }

    Tensor add(Tensor a, Tensor b) {
        require(shape(a) == shape(b), "add: shapes differ");
        return push(Op::Add, val(a) + val(b), {a, b});
    }

    /// Adds a 1 x cols bias row to every row of a.
    Tensor add_bias(Tensor a, Tensor bias) {
        require(shape(bias).first == 1 && shape(bias).second == shape(a).second,
                "add_bias: bias must be 1 x cols");
        return push(Op::AddBias, val(a).rowwise() + val(bias).row(0), {a, bias});
    }

    Tensor relu(Tensor a) { return push(Op::Relu, val(a).cwiseMax(0.0), {a}); }

    Tensor sigmoid(Tensor a) {
        Matrix out = val(a).unaryExpr([](double x) {
            return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        });
        return push(Op::Sigmoid, std::move(out), {a});
    }

    Tensor logsigmoid(Tensor a) {
        Matrix out = val(a).unaryExpr([](double x) {
            return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
        });
        return push(Op::LogSigmoid, std::move(out), {a});
    }

    Tensor neg(Tensor a) { return push(Op::Neg, -val(a), {a}); }

    Tensor scale(Tensor a, double c) {
        Tensor t = push(Op::Scale, val(a) * c, {a});
        nodes_[t.id].scalar = c;
        return t;
    }

    Tensor sum(Tensor a) {
        Matrix out(1, 1);
        out(0, 0) = val(a).sum();
        return push(Op::Sum, std::move(out), {a});
    }

    /// Mean over rows of the squared row distance ||a_i - b_i||^2.
    Tensor mse(Tensor a, Tensor b) {
        require(shape(a) == shape(b), "mse: shapes differ");
        Matrix out(1, 1);
        out(0, 0) = (val(a) - val(b)).squaredNorm() / static_cast<double>(shape(a).first);
        return push(Op::Mse, std::move(out), {a, b});
    }

    /// Column of per-row dot products a_i . b_i.
    Tensor rowwise_dot(Tensor a, Tensor b) {
        require(shape(a) == shape(b), "rowwise_dot: shapes differ");
        Matrix out = (val(a).array() * val(b).array()).rowwise().sum();
        return push(Op::RowwiseDot, std::move(out), {a, b});
    }

    /// out_i = sum_j alpha_ij h_j over the sparse structure. When the
    /// adjacency is tensor-weighted, alpha must be the tensor its src indices
    /// point into, and it receives gradients.
    Tensor spmm(std::shared_ptr<const SparseAdj> s, Tensor h, Tensor alpha = {}) {
        require(s != nullptr, "spmm: null adjacency");
        require(s->cols == shape(h).first, "spmm: adjacency/input mismatch");
        if (s->tensor_weighted()) {
            require(alpha.valid(), "spmm: tensor-weighted adjacency needs its weight tensor");
            const auto n = shape(alpha).first * shape(alpha).second;
            for (std::size_t ix : s->src)
                require(ix < n, "spmm: weight index out of range");
        }
        const Matrix& hv = val(h);
        Matrix out = Matrix::Zero(static_cast<Eigen::Index>(s->rows), hv.cols());
        const double* alpha_data = s->tensor_weighted() ? val(alpha).data() : nullptr;
        for (std::size_t i = 0; i < s->rows; ++i)
            for (std::size_t e = s->offsets[i]; e < s->offsets[i + 1]; ++e) {
                const double w = alpha_data ? alpha_data[s->src[e]] : s->weight[e];
                out.row(static_cast<Eigen::Index>(i)) +=
                    w * hv.row(static_cast<Eigen::Index>(s->col[e]));
            }
        std::vector<Tensor> inputs{h};
        if (s->tensor_weighted()) inputs.push_back(alpha);
        Tensor t = push(Op::Spmm, std::move(out), inputs);
        nodes_[t.id].adj = std::move(s);
        return t;
    }

    Tensor gather_rows(Tensor a, std::vector<std::size_t> idx) {
        for (std::size_t r : idx) require(r < shape(a).first, "gather_rows: index out of range");
        Matrix out(static_cast<Eigen::Index>(idx.size()), val(a).cols());
        for (std::size_t r = 0; r < idx.size(); ++r)
            out.row(static_cast<Eigen::Index>(r)) = val(a).row(static_cast<Eigen::Index>(idx[r]));
        Tensor t = push(Op::GatherRows, std::move(out), {a});
        nodes_[t.id].idx = std::move(idx);
        return t;
    }

    /// Accumulating scatter: out has out_rows rows, row idx[r] += a_r.
    Tensor scatter_rows(Tensor a, std::vector<std::size_t> idx, std::size_t out_rows) {
        require(idx.size() == shape(a).first, "scatter_rows: one index per input row");
        for (std::size_t r : idx) require(r < out_rows, "scatter_rows: index out of range");
        Matrix out = Matrix::Zero(static_cast<Eigen::Index>(out_rows), val(a).cols());
        for (std::size_t r = 0; r < idx.size(); ++r)
            out.row(static_cast<Eigen::Index>(idx[r])) += val(a).row(static_cast<Eigen::Index>(r));
        Tensor t = push(Op::ScatterRows, std::move(out), {a});
        nodes_[t.id].idx = std::move(idx);
        return t;
    }

    /// Seeds d(loss)/d(loss) = 1 and propagates to every node. Callable once
    /// per tape; a second call is an error rather than a silent
    /// double-accumulation.
    void backward(Tensor loss) {
        check(loss);
        require(shape(loss) == std::make_pair(std::size_t{1}, std::size_t{1}),
                "backward: loss must be a 1x1 scalar");
        if (backward_done_) throw std::runtime_error("backward: tape already differentiated");
        backward_done_ = true;

        for (auto& n : nodes_) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
        nodes_[loss.id].grad(0, 0) = 1.0;

        for (int id = loss.id; id >= 0; --id) {
            const Node& n = nodes_[id];
            if (n.op == Op::Leaf) continue;
            const Matrix& g = n.grad;
            switch (n.op) {
                case Op::MatMul:
                    gref(n.in[0]) += g * val(n.in[1]).transpose();
                    gref(n.in[1]) += val(n.in[0]).transpose() * g;
                    break;
                case Op::MatMulNT:
                    gref(n.in[0]) += g * val(n.in[1]);
                    gref(n.in[1]) += g.transpose() * val(n.in[0]);
                    break;
                case Op::Add:
                    gref(n.in[0]) += g;
                    gref(n.in[1]) += g;
                    break;
                case Op::AddBias:
                    gref(n.in[0]) += g;
                    gref(n.in[1]).row(0) += g.colwise().sum();
                    break;
                case Op::Relu:
                    gref(n.in[0]).array() += g.array() * (val(n.in[0]).array() > 0.0).cast<double>();
                    break;
                case Op::Sigmoid:
                    gref(n.in[0]).array() += g.array() * n.value.array() * (1.0 - n.value.array());
                    break;
                case Op::LogSigmoid:
                    // d/dx log s(x) = s(-x), computed from the input so the
                    // gradient stays nonzero under saturation.
                    gref(n.in[0]).array() +=
                        g.array() * val(n.in[0]).unaryExpr([](double x) {
                                         return x >= 0.0 ? std::exp(-x) / (1.0 + std::exp(-x))
                                                         : 1.0 / (1.0 + std::exp(x));
                                     }).array();
                    break;
                case Op::Neg:
                    gref(n.in[0]) -= g;
                    break;
                case Op::Scale:
                    gref(n.in[0]) += n.scalar * g;
                    break;
                case Op::Sum:
                    gref(n.in[0]).array() += g(0, 0);
                    break;
                case Op::Mse: {
                    const double c = 2.0 * g(0, 0) / static_cast<double>(val(n.in[0]).rows());
                    gref(n.in[0]) += c * (val(n.in[0]) - val(n.in[1]));
                    gref(n.in[1]) -= c * (val(n.in[0]) - val(n.in[1]));
                    break;
                }
                case Op::RowwiseDot:
                    gref(n.in[0]).array() += val(n.in[1]).array().colwise() * g.col(0).array();
                    gref(n.in[1]).array() += val(n.in[0]).array().colwise() * g.col(0).array();
                    break;
                case Op::Spmm: {
                    const SparseAdj& s = *n.adj;
                    Matrix& gh = gref(n.in[0]);
                    const Matrix& hv = val(n.in[0]);
                    const double* alpha_data = s.tensor_weighted() ? val(n.in[1]).data() : nullptr;
                    double* galpha = s.tensor_weighted() ? gref(n.in[1]).data() : nullptr;
                    for (std::size_t i = 0; i < s.rows; ++i)
                        for (std::size_t e = s.offsets[i]; e < s.offsets[i + 1]; ++e) {
                            const double w = alpha_data ? alpha_data[s.src[e]] : s.weight[e];
                            const auto gi = g.row(static_cast<Eigen::Index>(i));
                            gh.row(static_cast<Eigen::Index>(s.col[e])) += w * gi;
                            if (galpha)
                                galpha[s.src[e]] +=
                                    gi.dot(hv.row(static_cast<Eigen::Index>(s.col[e])));
                        }
                    break;
                }
                case Op::GatherRows:
                    for (std::size_t r = 0; r < n.idx.size(); ++r)
                        gref(n.in[0]).row(static_cast<Eigen::Index>(n.idx[r])) +=
                            g.row(static_cast<Eigen::Index>(r));
                    break;
                case Op::ScatterRows:
                    for (std::size_t r = 0; r < n.idx.size(); ++r)
                        gref(n.in[0]).row(static_cast<Eigen::Index>(r)) +=
                            g.row(static_cast<Eigen::Index>(n.idx[r]));
                    break;
                case Op::Leaf:
                    break;
            }
        }
    }

    const Matrix& value(Tensor t) const {
        check(t);
        return nodes_[t.id].value;
    }

    /// Gradient of the differentiated loss w.r.t. t; valid after backward().
    const Matrix& grad(Tensor t) const {
        check(t);
        if (!backward_done_) throw std::runtime_error("grad: call backward first");
        return nodes_[t.id].grad;
    }

    bool differentiated() const { return backward_done_; }
    std::size_t size() const { return nodes_.size(); }

private:
    enum class Op {
        Leaf, MatMul, MatMulNT, Add, AddBias, Relu, Sigmoid, LogSigmoid, Neg,
        Scale, Sum, Mse, RowwiseDot, Spmm, GatherRows, ScatterRows
    };

    struct Node {
        Op op;
        Matrix value;
        Matrix grad;
        bool requires_grad = false;
        std::vector<int> in;
        double scalar = 0.0;
        std::shared_ptr<const SparseAdj> adj;
        std::vector<std::size_t> idx;
    };

    static void require(bool cond, const char* msg) {
        if (!cond) throw std::invalid_argument(std::string("Tape: ") + msg);
    }

    void check(Tensor t) const {
        if (t.id < 0 || static_cast<std::size_t>(t.id) >= nodes_.size())
            throw std::invalid_argument("Tape: tensor from another tape or uninitialized");
    }

    const Matrix& val(Tensor t) const { return value(t); }
    const Matrix& val(int id) const { return nodes_[id].value; }
    Matrix& gref(int id) { return nodes_[id].grad; }
    std::pair<std::size_t, std::size_t> shape(Tensor t) const {
        check(t);
        return {static_cast<std::size_t>(nodes_[t.id].value.rows()),
                static_cast<std::size_t>(nodes_[t.id].value.cols())};
    }

    Tensor push(Op op, Matrix value, const std::vector<Tensor>& inputs, bool requires_grad = false) {
        if (backward_done_)
            throw std::runtime_error("Tape: cannot record after backward");
        if (!value.allFinite())
            throw std::runtime_error("Tape: non-finite values produced by forward op");
        Node n;
        n.op = op;
        n.value = std::move(value);
        n.requires_grad = requires_grad;
        for (const Tensor& t : inputs) {
            check(t);
            n.in.push_back(t.id);
            n.requires_grad = n.requires_grad || nodes_[t.id].requires_grad;
        }
        nodes_.push_back(std::move(n));
        const int id = static_cast<int>(nodes_.size()) - 1;
        return {id, static_cast<std::size_t>(nodes_[id].value.rows()),
                static_cast<std::size_t>(nodes_[id].value.cols())};
    }

    std::vector<Node> nodes_;
    bool backward_done_ = false;
};

} // namespace leap
