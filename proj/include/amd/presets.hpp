// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amd/config_io.hpp"

namespace amd {

// Named per-dataset defaults: patch length, gate scaling, batch size,
// epochs, block count, learning rate, layer-norm flag, plus the canonical
// chronological splits and CSV framing for the benchmark files.
std::optional<RunConfig> get_preset(const std::string& name);
std::vector<std::string> preset_names();

}  // namespace amd
