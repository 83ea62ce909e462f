// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "amd/layers.hpp"

namespace amd {

// Adam with bias correction and decoupled weight decay (applied as
// theta -= lr*wd*theta ahead of the Adam delta). Parameters with no
// populated gradient this step are treated as having a zero gradient.
class AdamOptimizer {
public:
    AdamOptimizer(double lr, double weight_decay = 0.0, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);

    void step(ParamRegistry& params);
    std::uint64_t timestep() const { return t_; }

private:
    double lr_, wd_, beta1_, beta2_, eps_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

// Scales all gradients so their global L2 norm is at most max_norm.
void clip_grad_norm(ParamRegistry& params, double max_norm);

}  // namespace amd
