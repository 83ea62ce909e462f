// SPDX-License-Identifier: Apache-2.0
//
// Adaptive multi-predictor synthesis: a gating network scores temporal
// patterns (noisy gating, piecewise top-k scaling between two softmaxes)
// and a bank of feedforward predictors is blended with those weights.
#pragma once

#include <random>

#include "amd/layers.hpp"
#include "amd/tensor.hpp"

namespace amd {

enum class GateMode { Dense, Sparse, Average };

GateMode gate_mode_from_string(const std::string& s);
std::string gate_mode_to_string(GateMode m);

struct SelectorParams {
    FeedForward decomp;  // L -> m
    Tensor w_noise;      // m x m, zero-initialized
    std::size_t num_predictors = 8;
    std::size_t top_k = 2;
    double alpha = 0.0;
    bool noise_enabled = true;
};

struct ProjectionParams {
    std::vector<FeedForward> predictors;  // each L -> T
};

SelectorParams make_selector(std::size_t lookback, std::size_t num_predictors, std::size_t top_k,
                             double alpha, std::size_t hidden, bool noise_enabled, Rng& rng);
ProjectionParams make_projection(std::size_t lookback, std::size_t horizon,
                                 std::size_t num_predictors, std::size_t hidden, Rng& rng);
void register_selector(ParamRegistry& reg, const std::string& prefix, const SelectorParams& p);
void register_projection(ParamRegistry& reg, const std::string& prefix,
                         const ProjectionParams& p);

// Piecewise scaling around the k-th largest entry of each row: entries at or
// above it map to alpha*exp(u)-1, the rest to alpha*log(u+1). The branch
// assignment is a constant of the forward pass; gradients follow the values.
Tensor topk_scale(const Tensor& u, std::size_t k, double alpha);

// rows x L -> rows x m simplex weights. Pass a non-null rng to add the
// training-time gating noise; evaluation calls leave it null.
Tensor selector_forward(const Tensor& u, const SelectorParams& p, Rng* noise_rng);

struct AmsOutput {
    Tensor pred;   // rows x T
    Tensor gates;  // rows x m, on the simplex in every mode
};

// u drives the selector, v feeds the predictors (per the block wiring).
AmsOutput ams_forward(const Tensor& u, const Tensor& v, const SelectorParams& sel,
                      const ProjectionParams& proj, GateMode mode, Rng* noise_rng);

}  // namespace amd
