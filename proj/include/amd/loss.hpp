// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "amd/tensor.hpp"

namespace amd {

struct LossConfig {
    double lambda1 = 1.0;       // selector balance coefficient
    double epsilon = 1e-10;     // variance-ratio floor
    bool per_row_balance = false;  // alternative reading, off by default
    // The parameter-norm term is realized as decoupled weight decay in the
    // optimizer and never enters the reported loss.
};

// Mean squared error over every element; shapes must match exactly.
Tensor pred_loss(const Tensor& y_hat, const Tensor& y);

// Coefficient-of-variation penalty on expert importance. gates is B x m with
// simplex rows; importance is the per-expert column sum over the batch and
// the result is Var(I) / (Mean(I)^2 + eps) with population variance.
// per_row instead averages the same ratio taken per row.
Tensor selector_balance_loss(const Tensor& gates, double eps, bool per_row = false);

Tensor total_loss(const Tensor& pred, const Tensor& balance, const LossConfig& cfg);

struct Metrics {
    double mse = 0.0;
    double mae = 0.0;
};

Metrics evaluate_metrics(const std::vector<double>& y_hat, const std::vector<double>& y);

}  // namespace amd
