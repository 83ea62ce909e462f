// SPDX-License-Identifier: Apache-2.0
//
// Multi-scale decomposable mixing: the input is pooled into progressively
// coarser views, then mixed back coarse-to-fine through residual
// feedforwards shared across channels.
#pragma once

#include "amd/layers.hpp"
#include "amd/tensor.hpp"

namespace amd {

struct MdmConfig {
    std::size_t num_scales = 4;  // pyramid levels including the raw scale
    std::size_t rate = 2;        // downsampling rate between levels
    bool linear_mode = false;    // single bias-free linear map per mixer
};

struct MdmParams {
    MdmConfig cfg;
    std::size_t lookback = 0;
    // mixers[i] maps scale i+1 (length L/rate^(i+1), floored) up to scale i.
    std::vector<FeedForward> mixers;
};

// Truncating block means over the last axis; remainder entries are dropped.
Tensor avg_downsample(const Tensor& x, std::size_t rate);

MdmParams make_mdm(const MdmConfig& cfg, std::size_t lookback, Rng& rng);
void register_mdm(ParamRegistry& reg, const std::string& prefix, const MdmParams& p);

// x is C x L; all channels share the mixer weights. With every mixer zeroed
// the block is the identity.
Tensor mdm_forward(const Tensor& x, const MdmParams& p);

}  // namespace amd
