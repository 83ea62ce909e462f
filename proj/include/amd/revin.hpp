// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "amd/layers.hpp"
#include "amd/tensor.hpp"

namespace amd {

// Reversible per-instance normalization. Works in channels-first layout
// (C x L in, C x T out); statistics are population mean/std per channel with
// the std floored at eps so constant channels stay finite.
struct RevinParams {
    bool affine = true;
    double eps = 1e-5;
    Tensor scale;  // C x 1, identity-initialized
    Tensor bias;   // C x 1
};

RevinParams make_revin(std::size_t channels, bool affine, double eps);
void register_revin(ParamRegistry& reg, const std::string& prefix, const RevinParams& p);

// Stats stay in the graph so gradients flow through them into denorm.
struct RevinStats {
    Tensor mean;  // C x 1
    Tensor std;   // C x 1
    bool valid = false;
};

Tensor revin_norm(const Tensor& x, const RevinParams& p, RevinStats& stats);
Tensor revin_denorm(const Tensor& y, const RevinParams& p, const RevinStats& stats);

}  // namespace amd
