// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "amd/ams.hpp"
#include "amd/ddi.hpp"
#include "amd/layers.hpp"
#include "amd/loss.hpp"
#include "amd/mdm.hpp"
#include "amd/revin.hpp"
#include "amd/tensor.hpp"

namespace amd {

struct RevinConfig {
    bool affine = true;
    double eps = 1e-5;
};

struct AmsConfig {
    std::size_t num_predictors = 8;
    std::size_t top_k = 2;
    double alpha = 0.0;
    std::size_t hidden = 2048;
    std::size_t selector_hidden = 128;
    GateMode mode = GateMode::Dense;
    bool noise_enabled = true;
};

struct TrainConfig {
    std::size_t batch_size = 128;
    std::size_t epochs = 10;
    double learning_rate = 5e-5;
    double weight_decay = 1e-7;
    std::uint64_t seed = 2024;
    double grad_clip = 0.0;  // 0 disables clipping
};

struct AblationConfig {
    bool no_mdm = false;  // multi-scale mixing replaced by identity
    bool no_ddi = false;  // v := u
};

struct ModelConfig {
    std::size_t lookback = 512;
    std::size_t horizon = 96;
    std::size_t channels = 0;  // filled in from the data
    RevinConfig revin;
    MdmConfig mdm;
    DdiConfig ddi;
    AmsConfig ams;
    LossConfig loss;
    TrainConfig train;
    AblationConfig ablation;

    void validate() const;
};

struct ForwardResult {
    Tensor pred;   // B x T x C
    Tensor gates;  // B x C x m
};

// The assembled forecaster: per instance, instance-normalize, transpose to
// channels-first, multi-scale mix, run the patch recurrence, gate-and-blend
// the predictor bank per channel, transpose back, denormalize.
class AmdModel {
public:
    explicit AmdModel(ModelConfig cfg);

    const ModelConfig& config() const { return cfg_; }
    ParamRegistry& params() { return registry_; }
    const ParamRegistry& params() const { return registry_; }

    // X is B x L x C. Pass a non-null rng for training-time gating noise.
    ForwardResult forward(const Tensor& X, Rng* noise_rng = nullptr) const;

private:
    ModelConfig cfg_;
    RevinParams revin_;
    MdmParams mdm_;
    DdiParams ddi_;
    SelectorParams selector_;
    ProjectionParams projection_;
    ParamRegistry registry_;
};

}  // namespace amd
