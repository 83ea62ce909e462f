// SPDX-License-Identifier: Apache-2.0
//
// Dual dependency interaction: the mixed C x L matrix is cut into patches;
// a sequential recurrence mixes time within each patch (per channel) and
// channels across the patch (per time step), the latter damped by a scaling
// rate so cross-channel noise can be suppressed or switched off entirely.
#pragma once

#include "amd/layers.hpp"
#include "amd/tensor.hpp"

namespace amd {

struct DdiConfig {
    std::size_t patch_len = 16;
    std::size_t num_blocks = 1;
    double channel_mix_scale = 0.0;  // beta; 0 disables cross-channel mixing
    bool use_layer_norm = true;
    std::size_t d_model_override = 0;  // 0 = derive from channel count
    int ff_depth = 2;
};

// max(32, 2^round(log2(channels)))
std::size_t compute_d_model(std::size_t channels);

struct DdiBlockParams {
    FeedForward time_mix;     // patch_len -> patch_len, shared by channels
    FeedForward channel_mix;  // channels -> channels, shared by time steps
    Tensor ln_gain, ln_offset;  // over the length axis, when layer norm is on
};

struct DdiParams {
    DdiConfig cfg;
    std::size_t lookback = 0, channels = 0, d_model = 0;
    std::vector<DdiBlockParams> blocks;
};

// C x L <-> C x N x P views; exact inverses of each other.
Tensor patchify(const Tensor& u, std::size_t patch_len);
Tensor unpatchify(const Tensor& u_patched);

DdiParams make_ddi(const DdiConfig& cfg, std::size_t lookback, std::size_t channels, Rng& rng);
void register_ddi(ParamRegistry& reg, const std::string& prefix, const DdiParams& p);

Tensor ddi_block_forward(const Tensor& u, const DdiBlockParams& block, const DdiParams& p);
Tensor ddi_forward(const Tensor& u, const DdiParams& p);  // stacks cfg.num_blocks blocks

}  // namespace amd
