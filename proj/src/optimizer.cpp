// SPDX-License-Identifier: Apache-2.0
#include "amd/optimizer.hpp"

#include <cmath>

namespace amd {

AdamOptimizer::AdamOptimizer(double lr, double weight_decay, double beta1, double beta2,
                             double eps)
    : lr_(lr), wd_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(ParamRegistry& params) {
    auto& items = params.items();
    if (m_.empty()) {
        m_.resize(items.size());
        v_.resize(items.size());
        for (std::size_t i = 0; i < items.size(); ++i) {
            m_[i].assign(items[i].second.size(), 0.0);
            v_[i].assign(items[i].second.size(), 0.0);
        }
    }
    if (m_.size() != items.size()) throw Error("adam: registry changed size");

    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));

    for (std::size_t i = 0; i < items.size(); ++i) {
        auto& name = items[i].first;
        auto& tensor = items[i].second;
        auto& data = tensor.raw_data();
        const std::vector<double>* grad = tensor.has_grad() ? &tensor.grad() : nullptr;
        for (std::size_t j = 0; j < data.size(); ++j) {
            double g = grad ? (*grad)[j] : 0.0;
            if (!std::isfinite(g))
                throw NumericError("adam: non-finite gradient for parameter " + name);
            if (wd_ != 0.0) data[j] -= lr_ * wd_ * data[j];
            m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
            v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
            double mhat = m_[i][j] / bc1;
            double vhat = v_[i][j] / bc2;
            data[j] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
        }
    }
}

void clip_grad_norm(ParamRegistry& params, double max_norm) {
    if (max_norm <= 0.0) return;
    double sq = 0.0;
    for (const auto& [name, t] : params.items())
        if (t.has_grad())
            for (double g : t.grad()) sq += g * g;
    double norm = std::sqrt(sq);
    if (norm <= max_norm) return;
    double scale = max_norm / norm;
    for (auto& [name, t] : params.items())
        if (t.has_grad())
            for (auto& g : t.impl()->grad) g *= scale;
}

}  // namespace amd
