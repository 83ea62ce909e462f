// SPDX-License-Identifier: Apache-2.0
#include "amd/model.hpp"

namespace amd {

void ModelConfig::validate() const {
    if (lookback == 0 || horizon == 0) throw ConfigError("config: lookback and horizon must be positive");
    if (channels == 0) throw ConfigError("config: channel count not set");
    if (lookback % ddi.patch_len != 0)
        throw ConfigError("config: lookback " + std::to_string(lookback) +
                          " must be a multiple of patch length " + std::to_string(ddi.patch_len));
    std::size_t min_len = 1;
    for (std::size_t i = 0; i < mdm.num_scales; ++i) min_len *= mdm.rate;
    if (mdm.num_scales > 1 && lookback < min_len)
        throw ConfigError("config: lookback " + std::to_string(lookback) + " below minimum " +
                          std::to_string(min_len) + " for num_scales=" +
                          std::to_string(mdm.num_scales));
    if (ams.top_k == 0 || ams.top_k > ams.num_predictors)
        throw ConfigError("config: top_k must be in [1, num_predictors]");
    if (train.batch_size == 0) throw ConfigError("config: batch size must be positive");
}

AmdModel::AmdModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    // Each block draws from its own seeded stream, so toggling one block on
    // or off cannot shift the initialization of any other.
    auto block_rng = [&](std::uint64_t salt) { return Rng(cfg_.train.seed * 0x9e3779b9ull + salt); };

    revin_ = make_revin(cfg_.channels, cfg_.revin.affine, cfg_.revin.eps);
    if (!cfg_.ablation.no_mdm) {
        Rng rng = block_rng(1);
        mdm_ = make_mdm(cfg_.mdm, cfg_.lookback, rng);
    }
    if (!cfg_.ablation.no_ddi) {
        Rng rng = block_rng(2);
        ddi_ = make_ddi(cfg_.ddi, cfg_.lookback, cfg_.channels, rng);
    }
    if (cfg_.ams.mode != GateMode::Average) {
        Rng rng = block_rng(3);
        selector_ = make_selector(cfg_.lookback, cfg_.ams.num_predictors, cfg_.ams.top_k,
                                  cfg_.ams.alpha, cfg_.ams.selector_hidden,
                                  cfg_.ams.noise_enabled, rng);
    }
    {
        Rng rng = block_rng(4);
        projection_ = make_projection(cfg_.lookback, cfg_.horizon, cfg_.ams.num_predictors,
                                      cfg_.ams.hidden, rng);
    }

    register_revin(registry_, "revin", revin_);
    if (!cfg_.ablation.no_mdm) register_mdm(registry_, "mdm", mdm_);
    if (!cfg_.ablation.no_ddi) register_ddi(registry_, "ddi", ddi_);
    if (cfg_.ams.mode != GateMode::Average) register_selector(registry_, "ams.selector", selector_);
    register_projection(registry_, "ams.projection", projection_);
}

ForwardResult AmdModel::forward(const Tensor& X, Rng* noise_rng) const {
    if (X.rank() != 3 || X.dim(1) != cfg_.lookback || X.dim(2) != cfg_.channels)
        throw ShapeError("model: expected B x " + std::to_string(cfg_.lookback) + " x " +
                         std::to_string(cfg_.channels) + " input, got " + shape_str(X.shape()));
    std::size_t batch = X.dim(0);
    std::size_t c = cfg_.channels;

    // All channel-shared stages run on one stacked (B*C) x L matrix, so each
    // weight joins a single matmul per pass. Row b*C + ch holds instance b,
    // channel ch.
    std::vector<Tensor> stacked;
    stacked.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b)
        stacked.push_back(transpose(reshape(slice(X, 0, b, 1), {cfg_.lookback, c})));
    Tensor x_cl = batch == 1 ? stacked[0] : concat(stacked, 0);

    RevinParams revin = revin_;
    if (revin.affine && batch > 1) {
        revin.scale = concat(std::vector<Tensor>(batch, revin_.scale), 0);
        revin.bias = concat(std::vector<Tensor>(batch, revin_.bias), 0);
    }
    RevinStats stats;
    Tensor normed = revin_norm(x_cl, revin, stats);
    Tensor u = cfg_.ablation.no_mdm ? normed : mdm_forward(normed, mdm_);

    // The patch recurrence mixes channels within one instance, so it runs on
    // per-instance row blocks.
    Tensor v = u;
    if (!cfg_.ablation.no_ddi) {
        if (batch == 1) {
            v = ddi_forward(u, ddi_);
        } else {
            std::vector<Tensor> parts;
            parts.reserve(batch);
            for (std::size_t b = 0; b < batch; ++b)
                parts.push_back(ddi_forward(slice(u, 0, b * c, c), ddi_));
            v = concat(parts, 0);
        }
    }

    AmsOutput ams = ams_forward(u, v, selector_, projection_, cfg_.ams.mode, noise_rng);
    Tensor y_cl = revin_denorm(ams.pred, revin, stats);  // (B*C) x T

    std::vector<Tensor> preds;
    preds.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b)
        preds.push_back(
            reshape(transpose(slice(y_cl, 0, b * c, c)), {1, cfg_.horizon, c}));
    ForwardResult out;
    out.pred = batch == 1 ? preds[0] : concat(preds, 0);
    out.gates = reshape(ams.gates, {batch, c, cfg_.ams.num_predictors});
    return out;
}

}  // namespace amd
