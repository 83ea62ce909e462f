// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint container, version 1:
//
//   bytes 0..7   magic "AMDCKPT1"
//   bytes 8..15  little-endian u64: header length H
//   H bytes      UTF-8 JSON header: format_version, full model config,
//                parameter manifest [{name, shape, dtype, offset, count}],
//                training metadata (epoch, best validation mse, rng state,
//                standardization stats, split, data framing)
//   payload      raw little-endian IEEE-754 doubles, parameters in manifest
//                order; offsets are byte positions that tile the payload
//                exactly.
//
// Loading validates the magic, version, manifest tiling and payload size
// before any parameter is touched; a bad file never yields a partial model.
#pragma once

#include <optional>
#include <string>

#include "amd/data.hpp"
#include "amd/model.hpp"

namespace amd {

struct CheckpointMeta {
    std::size_t epoch = 0;
    double best_val_mse = 0.0;
    std::string rng_state;
    ChannelStats norm_stats;
    std::vector<std::string> channel_names;
    SplitSpec split;
    bool has_header = true;
    int date_column = -1;
    std::size_t stride = 1;
};

void save_checkpoint(const AmdModel& model, const CheckpointMeta& meta, const std::string& path);

struct LoadedCheckpoint {
    AmdModel model;
    CheckpointMeta meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace amd
