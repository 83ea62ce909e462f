// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "amd/data.hpp"
#include "amd/model.hpp"

namespace amd {

// Data framing for a run: where the CSV lives and how to cut it.
struct DataSpec {
    std::string path;
    bool has_header = true;
    int date_column = -1;  // -1 = none
    std::size_t stride = 1;
    SplitSpec split;
};

struct RunConfig {
    std::string preset;  // informational once merged
    DataSpec data;
    ModelConfig model;
};

nlohmann::json split_to_json(const SplitSpec& s);
SplitSpec split_from_json(const nlohmann::json& j);

nlohmann::json model_config_to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);  // rejects unknown keys

nlohmann::json run_config_to_json(const RunConfig& c);

// Loads a run-config JSON file. If the file (or the override argument) names
// a preset, the preset provides the base values and every key present in the
// file wins over it; each override is logged one per line.
RunConfig load_run_config(const std::string& path, const std::string& preset_override,
                          std::ostream* log);
RunConfig run_config_from_json(nlohmann::json file_json, const std::string& preset_override,
                               std::ostream* log);

}  // namespace amd
