// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>

#include "amd/data.hpp"
#include "amd/model.hpp"
#include "amd/optimizer.hpp"

namespace amd {

struct TrainReport {
    std::vector<double> train_loss;  // per epoch, mean total loss
    std::vector<double> val_mse;     // per epoch
    double initial_val_mse = 0.0;
    std::size_t best_epoch = 0;  // 0 = initial parameters, e = after epoch e
    double best_val_mse = 0.0;
    std::string final_rng_state;
};

using EpochCallback =
    std::function<void(std::size_t epoch, double train_loss, double val_mse)>;

// Assembles windows [indices] into (B x L x C input, B x T x C target).
std::pair<Tensor, Tensor> assemble_batch(const WindowDataset& ds,
                                         const std::vector<std::size_t>& indices);

// Mean squared error / absolute error of the model over a whole dataset,
// evaluated without gating noise or graph recording.
Metrics dataset_metrics(const AmdModel& model, const WindowDataset& ds, std::size_t batch_size,
                        std::size_t horizon_cap = 0);

// Seeded, single-threaded training: shuffled minibatches, composite loss,
// Adam with decoupled weight decay, validation after every epoch, and the
// best-validation parameters restored at the end. Identical seeds give
// identical trajectories.
TrainReport train_model(AmdModel& model, const WindowDataset& train_set,
                        const WindowDataset& val_set, const EpochCallback& cb = nullptr);

}  // namespace amd
