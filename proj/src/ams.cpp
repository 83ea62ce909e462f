// SPDX-License-Identifier: Apache-2.0
#include "amd/ams.hpp"

#include <algorithm>
#include <cmath>

namespace amd {

GateMode gate_mode_from_string(const std::string& s) {
    if (s == "dense") return GateMode::Dense;
    if (s == "sparse") return GateMode::Sparse;
    if (s == "average") return GateMode::Average;
    throw ConfigError("ams: unknown gate mode '" + s + "' (expected dense|sparse|average)");
}

std::string gate_mode_to_string(GateMode m) {
    switch (m) {
        case GateMode::Dense: return "dense";
        case GateMode::Sparse: return "sparse";
        case GateMode::Average: return "average";
    }
    return "dense";
}

SelectorParams make_selector(std::size_t lookback, std::size_t num_predictors, std::size_t top_k,
                             double alpha, std::size_t hidden, bool noise_enabled, Rng& rng) {
    if (top_k == 0 || top_k > num_predictors)
        throw ConfigError("ams: top_k must be in [1, num_predictors]");
    SelectorParams p;
    p.decomp = make_feedforward(lookback, hidden, num_predictors, 2, true, true, rng);
    p.w_noise = Tensor::zeros({num_predictors, num_predictors});
    p.w_noise.set_requires_grad(true);
    p.num_predictors = num_predictors;
    p.top_k = top_k;
    p.alpha = alpha;
    p.noise_enabled = noise_enabled;
    return p;
}

ProjectionParams make_projection(std::size_t lookback, std::size_t horizon,
                                 std::size_t num_predictors, std::size_t hidden, Rng& rng) {
    ProjectionParams p;
    for (std::size_t j = 0; j < num_predictors; ++j)
        p.predictors.push_back(make_feedforward(lookback, hidden, horizon, 2, true, true, rng));
    return p;
}

void register_selector(ParamRegistry& reg, const std::string& prefix, const SelectorParams& p) {
    reg.add_feedforward(prefix + ".decomp", p.decomp);
    reg.add(prefix + ".w_noise", p.w_noise);
}

void register_projection(ParamRegistry& reg, const std::string& prefix,
                         const ProjectionParams& p) {
    for (std::size_t j = 0; j < p.predictors.size(); ++j)
        reg.add_feedforward(prefix + ".predictor" + std::to_string(j), p.predictors[j]);
}

namespace {

// Per-row 0/1 mask marking the k largest entries (ties at the threshold all
// count as top). Constants of the forward pass.
Tensor topk_mask(const Tensor& u, std::size_t k) {
    std::size_t m = u.shape().back();
    std::size_t rows = u.size() / m;
    std::vector<double> mask(u.size(), 0.0);
    const auto& v = u.values();
    std::vector<double> row(m);
    for (std::size_t r = 0; r < rows; ++r) {
        row.assign(v.begin() + r * m, v.begin() + (r + 1) * m);
        std::nth_element(row.begin(), row.begin() + (k - 1), row.end(), std::greater<double>());
        double kth = row[k - 1];
        for (std::size_t j = 0; j < m; ++j)
            if (v[r * m + j] >= kth) mask[r * m + j] = 1.0;
    }
    return Tensor::from_data(u.shape(), std::move(mask));
}

}  // namespace

Tensor topk_scale(const Tensor& u, std::size_t k, double alpha) {
    if (u.rank() == 0) throw ShapeError("topk_scale: needs rank >= 1");
    std::size_t m = u.shape().back();
    if (k == 0 || k > m)
        throw ConfigError("topk_scale: k=" + std::to_string(k) + " out of range for " +
                          std::to_string(m) + " entries");
    Tensor mask = topk_mask(u, k);
    Tensor inv_mask = add_scalar(mul_scalar(mask, -1.0), 1.0);
    Tensor top_branch = add_scalar(mul_scalar(exp(u), alpha), -1.0);
    Tensor low_branch = mul_scalar(log(add_scalar(u, 1.0)), alpha);
    return add(multiply(mask, top_branch), multiply(inv_mask, low_branch));
}

Tensor selector_forward(const Tensor& u, const SelectorParams& p, Rng* noise_rng) {
    Tensor logits = p.decomp.apply(u);
    if (p.noise_enabled && noise_rng != nullptr) {
        std::normal_distribution<double> dist(0.0, 1.0);
        std::vector<double> psi(logits.size());
        for (auto& v : psi) v = dist(*noise_rng);
        Tensor noise = Tensor::from_data(logits.shape(), std::move(psi));
        logits = add(logits, multiply(noise, softplus(matmul(logits, p.w_noise))));
    }
    return softmax(topk_scale(softmax(logits), p.top_k, p.alpha));
}

AmsOutput ams_forward(const Tensor& u, const Tensor& v, const SelectorParams& sel,
                      const ProjectionParams& proj, GateMode mode, Rng* noise_rng) {
    std::size_t m = proj.predictors.size();
    std::size_t rows = u.dim(0);

    Tensor gates;
    if (mode == GateMode::Average) {
        gates = Tensor::full({rows, m}, 1.0 / static_cast<double>(m));
    } else {
        gates = selector_forward(u, sel, noise_rng);
        if (mode == GateMode::Sparse) {
            // Keep the top-k weights and renormalize; dropped predictors see
            // an exact zero and therefore an exactly-zero gradient.
            Tensor mask = topk_mask(gates, sel.top_k);
            Tensor kept = multiply(gates, mask);
            gates = divide(kept, sum(kept, 1, true));
        }
    }

    AmsOutput out;
    out.gates = gates;
    for (std::size_t j = 0; j < m; ++j) {
        Tensor weight = slice(gates, 1, j, 1);  // rows x 1
        Tensor term = multiply(weight, proj.predictors[j].apply(v));
        out.pred = j == 0 ? term : add(out.pred, term);
    }
    return out;
}

}  // namespace amd
