#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "leap/matrix.hpp"

namespace leap {

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One Adam update with bias correction. m and v are the running first and
/// second moments for this parameter; t is the 1-based step count.
inline void adam_step(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                      const AdamConfig& cfg, std::size_t t) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols())
        throw std::invalid_argument("adam_step: grad shape mismatch");
    if (m.size() == 0) m = Matrix::Zero(param.rows(), param.cols());
    if (v.size() == 0) v = Matrix::Zero(param.rows(), param.cols());
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v.array().matrix() + (1.0 - cfg.beta2) * grad.array().square().matrix();
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    param.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}

/// Moment storage for a fixed list of parameters, updated in lockstep.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(const std::vector<Matrix*>& params, const std::vector<const Matrix*>& grads) {
        if (params.size() != grads.size())
            throw std::invalid_argument("Adam::step: one grad per param");
        if (m_.empty()) {
            m_.resize(params.size());
            v_.resize(params.size());
        }
        if (m_.size() != params.size())
            throw std::invalid_argument("Adam::step: parameter count changed");
        ++t_;
        for (std::size_t i = 0; i < params.size(); ++i)
            adam_step(*params[i], *grads[i], m_[i], v_[i], cfg_, t_);
    }

    std::size_t steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<Matrix> m_, v_;
    std::size_t t_ = 0;
};

} // namespace leap
