// SPDX-License-Identifier: Apache-2.0
#include "amd/presets.hpp"

namespace amd {

namespace {

struct PresetRow {
    const char* name;
    std::size_t patch_len;
    double alpha;
    std::size_t batch_size;
    std::size_t epochs;
    std::size_t num_blocks;
    double learning_rate;
    bool layer_norm;
    std::size_t lookback;
    std::size_t horizon;
    std::size_t train_count, val_count, test_count;
};

// Per-dataset settings: patch length, gate scaling, batch, epochs, block
// count, learning rate, layer norm, default window sizes, canonical splits.
constexpr PresetRow kPresets[] = {
    {"etth1", 16, 0.0, 128, 10, 1, 5e-5, true, 512, 96, 8545, 2881, 2881},
    {"etth2", 4, 1.0, 128, 10, 1, 5e-5, false, 512, 96, 8545, 2881, 2881},
    {"ettm1", 16, 0.0, 128, 10, 1, 3e-5, true, 512, 96, 34465, 11521, 11521},
    {"ettm2", 8, 0.0, 128, 10, 1, 1e-5, true, 512, 96, 34465, 11521, 11521},
    {"exchange", 4, 0.0, 512, 10, 1, 3e-4, true, 512, 96, 5120, 665, 1422},
    {"weather", 16, 0.0, 128, 10, 1, 5e-5, true, 512, 96, 36792, 5271, 10540},
    {"ecl", 16, 0.0, 128, 20, 1, 3e-4, false, 512, 96, 18317, 2633, 5261},
    {"traffic", 16, 0.0, 32, 20, 1, 8e-5, false, 512, 96, 12185, 1757, 3509},
    {"solar", 8, 1.0, 128, 10, 1, 2e-5, true, 512, 96, 36601, 5161, 10417},
    {"pems03", 4, 1.0, 32, 10, 1, 5e-5, false, 96, 12, 15617, 5135, 5135},
    {"pems04", 4, 1.0, 32, 5, 1, 5e-5, false, 96, 12, 10172, 3375, 3375},
    {"pems07", 16, 1.0, 32, 10, 1, 5e-5, false, 96, 12, 16911, 5622, 5622},
    {"pems08", 16, 1.0, 32, 10, 1, 5e-5, false, 96, 12, 10690, 3548, 3548},
};

}  // namespace

std::optional<RunConfig> get_preset(const std::string& name) {
    for (const auto& row : kPresets) {
        if (name != row.name) continue;
        RunConfig c;
        c.preset = row.name;
        c.data.has_header = true;
        c.data.date_column = 0;  // benchmark CSVs lead with a date column
        c.data.split.mode = SplitSpec::Mode::Counts;
        c.data.split.train_count = row.train_count;
        c.data.split.val_count = row.val_count;
        c.data.split.test_count = row.test_count;
        c.model.lookback = row.lookback;
        c.model.horizon = row.horizon;
        c.model.ddi.patch_len = row.patch_len;
        c.model.ddi.num_blocks = row.num_blocks;
        c.model.ddi.use_layer_norm = row.layer_norm;
        c.model.ams.alpha = row.alpha;
        c.model.train.batch_size = row.batch_size;
        c.model.train.epochs = row.epochs;
        c.model.train.learning_rate = row.learning_rate;
        return c;
    }
    return std::nullopt;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& row : kPresets) out.push_back(row.name);
    return out;
}

}  // namespace amd
