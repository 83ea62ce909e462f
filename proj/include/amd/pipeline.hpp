// SPDX-License-Identifier: Apache-2.0
//
// End-to-end plumbing shared by the CLI and the python module: run a
// training config against a series, evaluate checkpoints, produce forecasts
// and gate traces.
#pragma once

#include <iosfwd>

#include "amd/checkpoint.hpp"
#include "amd/config_io.hpp"
#include "amd/train.hpp"

namespace amd {

struct TrainedArtifacts {
    AmdModel model;
    CheckpointMeta meta;
    TrainReport report;
    Metrics test_metrics;
    bool has_test = false;
};

// Standardizes with train-partition statistics, cuts windows, trains, and
// evaluates the test partition when one exists. The series channel count
// fills config.model.channels.
TrainedArtifacts run_training(const RunConfig& cfg, const Series& series, std::ostream* log);

// Metrics over the checkpoint's test partition of `series`, in standardized
// space (the benchmark convention). horizon_cap truncates scoring to the
// first `horizon_cap` steps; 0 scores the full horizon.
Metrics evaluate_series(const AmdModel& model, const CheckpointMeta& meta, const Series& series,
                        std::size_t horizon_cap = 0);

// Forecast continuing the last `lookback` rows of `series`, returned in the
// original units (T x C, row-major).
std::vector<double> predict_next(const AmdModel& model, const CheckpointMeta& meta,
                                 const Series& series);

struct GateTraceRow {
    std::size_t window = 0;
    std::size_t channel = 0;
    std::vector<double> weights;
};

// Selector weights for every window/channel of the series (stride from the
// checkpoint), evaluated without gating noise.
std::vector<GateTraceRow> gate_trace(const AmdModel& model, const CheckpointMeta& meta,
                                     const Series& series);

void check_channels(const AmdModel& model, const Series& series);

}  // namespace amd
