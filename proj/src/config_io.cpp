// SPDX-License-Identifier: Apache-2.0
#include "amd/config_io.hpp"

#include <fstream>
#include <ostream>

#include "amd/presets.hpp"

namespace amd {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!j.is_object()) throw ConfigError("config: " + where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json split_to_json(const SplitSpec& s) {
    if (s.mode == SplitSpec::Mode::Counts)
        return json{{"mode", "counts"},
                    {"train", s.train_count},
                    {"val", s.val_count},
                    {"test", s.test_count}};
    return json{{"mode", "ratio"},
                {"train", s.train_frac},
                {"val", s.val_frac},
                {"test", s.test_frac}};
}

SplitSpec split_from_json(const json& j) {
    check_keys(j, {"mode", "train", "val", "test"}, "data.split");
    SplitSpec s;
    std::string mode = j.value("mode", "ratio");
    if (mode == "counts") {
        s.mode = SplitSpec::Mode::Counts;
        get_if(j, "train", s.train_count);
        get_if(j, "val", s.val_count);
        get_if(j, "test", s.test_count);
    } else if (mode == "ratio") {
        s.mode = SplitSpec::Mode::Ratio;
        get_if(j, "train", s.train_frac);
        get_if(j, "val", s.val_frac);
        get_if(j, "test", s.test_frac);
    } else {
        throw ConfigError("config: split mode must be 'ratio' or 'counts'");
    }
    return s;
}

json model_config_to_json(const ModelConfig& c) {
    return json{
        {"lookback", c.lookback},
        {"horizon", c.horizon},
        {"channels", c.channels},
        {"revin", {{"affine", c.revin.affine}, {"eps", c.revin.eps}}},
        {"mdm",
         {{"num_scales", c.mdm.num_scales},
          {"rate", c.mdm.rate},
          {"linear_mode", c.mdm.linear_mode}}},
        {"ddi",
         {{"patch_len", c.ddi.patch_len},
          {"num_blocks", c.ddi.num_blocks},
          {"channel_mix_scale", c.ddi.channel_mix_scale},
          {"use_layer_norm", c.ddi.use_layer_norm},
          {"d_model", c.ddi.d_model_override},
          {"ff_depth", c.ddi.ff_depth}}},
        {"ams",
         {{"num_predictors", c.ams.num_predictors},
          {"top_k", c.ams.top_k},
          {"alpha", c.ams.alpha},
          {"hidden", c.ams.hidden},
          {"selector_hidden", c.ams.selector_hidden},
          {"mode", gate_mode_to_string(c.ams.mode)},
          {"noise", c.ams.noise_enabled}}},
        {"loss",
         {{"lambda1", c.loss.lambda1},
          {"epsilon", c.loss.epsilon},
          {"per_row_balance", c.loss.per_row_balance}}},
        {"train",
         {{"batch_size", c.train.batch_size},
          {"epochs", c.train.epochs},
          {"learning_rate", c.train.learning_rate},
          {"weight_decay", c.train.weight_decay},
          {"seed", c.train.seed},
          {"grad_clip", c.train.grad_clip}}},
        {"ablation", {{"no_mdm", c.ablation.no_mdm}, {"no_ddi", c.ablation.no_ddi}}},
    };
}

ModelConfig model_config_from_json(const json& j) {
    check_keys(j,
               {"lookback", "horizon", "channels", "revin", "mdm", "ddi", "ams", "loss", "train",
                "ablation"},
               "model");
    ModelConfig c;
    get_if(j, "lookback", c.lookback);
    get_if(j, "horizon", c.horizon);
    get_if(j, "channels", c.channels);
    if (j.contains("revin")) {
        const json& r = j.at("revin");
        check_keys(r, {"affine", "eps"}, "model.revin");
        get_if(r, "affine", c.revin.affine);
        get_if(r, "eps", c.revin.eps);
    }
    if (j.contains("mdm")) {
        const json& m = j.at("mdm");
        check_keys(m, {"num_scales", "rate", "linear_mode"}, "model.mdm");
        get_if(m, "num_scales", c.mdm.num_scales);
        get_if(m, "rate", c.mdm.rate);
        get_if(m, "linear_mode", c.mdm.linear_mode);
    }
    if (j.contains("ddi")) {
        const json& d = j.at("ddi");
        check_keys(d, {"patch_len", "num_blocks", "channel_mix_scale", "use_layer_norm", "d_model",
                       "ff_depth"},
                   "model.ddi");
        get_if(d, "patch_len", c.ddi.patch_len);
        get_if(d, "num_blocks", c.ddi.num_blocks);
        get_if(d, "channel_mix_scale", c.ddi.channel_mix_scale);
        get_if(d, "use_layer_norm", c.ddi.use_layer_norm);
        get_if(d, "d_model", c.ddi.d_model_override);
        get_if(d, "ff_depth", c.ddi.ff_depth);
    }
    if (j.contains("ams")) {
        const json& a = j.at("ams");
        check_keys(a, {"num_predictors", "top_k", "alpha", "hidden", "selector_hidden", "mode",
                       "noise"},
                   "model.ams");
        get_if(a, "num_predictors", c.ams.num_predictors);
        get_if(a, "top_k", c.ams.top_k);
        get_if(a, "alpha", c.ams.alpha);
        get_if(a, "hidden", c.ams.hidden);
        get_if(a, "selector_hidden", c.ams.selector_hidden);
        if (a.contains("mode")) c.ams.mode = gate_mode_from_string(a.at("mode").get<std::string>());
        get_if(a, "noise", c.ams.noise_enabled);
    }
    if (j.contains("loss")) {
        const json& l = j.at("loss");
        check_keys(l, {"lambda1", "epsilon", "per_row_balance"}, "model.loss");
        get_if(l, "lambda1", c.loss.lambda1);
        get_if(l, "epsilon", c.loss.epsilon);
        get_if(l, "per_row_balance", c.loss.per_row_balance);
    }
    if (j.contains("train")) {
        const json& t = j.at("train");
        check_keys(t, {"batch_size", "epochs", "learning_rate", "weight_decay", "seed",
                       "grad_clip"},
                   "model.train");
        get_if(t, "batch_size", c.train.batch_size);
        get_if(t, "epochs", c.train.epochs);
        get_if(t, "learning_rate", c.train.learning_rate);
        get_if(t, "weight_decay", c.train.weight_decay);
        get_if(t, "seed", c.train.seed);
        get_if(t, "grad_clip", c.train.grad_clip);
    }
    if (j.contains("ablation")) {
        const json& a = j.at("ablation");
        check_keys(a, {"no_mdm", "no_ddi"}, "model.ablation");
        get_if(a, "no_mdm", c.ablation.no_mdm);
        get_if(a, "no_ddi", c.ablation.no_ddi);
    }
    return c;
}

json run_config_to_json(const RunConfig& c) {
    return json{{"data",
                 {{"path", c.data.path},
                  {"has_header", c.data.has_header},
                  {"date_column", c.data.date_column},
                  {"stride", c.data.stride},
                  {"split", split_to_json(c.data.split)}}},
                {"model", model_config_to_json(c.model)}};
}

namespace {

void merge_logged(json& base, const json& overrides, const std::string& prefix,
                  std::ostream* log) {
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object() && base.contains(it.key()) && base.at(it.key()).is_object()) {
            merge_logged(base.at(it.key()), *it, path, log);
        } else {
            if (log) *log << "config: set " << path << " = " << it->dump() << "\n";
            base[it.key()] = *it;
        }
    }
}

DataSpec data_spec_from_json(const json& j) {
    check_keys(j, {"path", "has_header", "date_column", "stride", "split"}, "data");
    DataSpec d;
    get_if(j, "path", d.path);
    get_if(j, "has_header", d.has_header);
    get_if(j, "date_column", d.date_column);
    get_if(j, "stride", d.stride);
    if (j.contains("split")) d.split = split_from_json(j.at("split"));
    return d;
}

}  // namespace

RunConfig run_config_from_json(json file_json, const std::string& preset_override,
                               std::ostream* log) {
    check_keys(file_json, {"preset", "data", "model"}, "run config");
    std::string preset_name = preset_override;
    if (preset_name.empty() && file_json.contains("preset"))
        preset_name = file_json.at("preset").get<std::string>();
    file_json.erase("preset");

    RunConfig base;
    if (!preset_name.empty()) {
        auto p = get_preset(preset_name);
        if (!p) throw ConfigError("config: unknown preset '" + preset_name + "'");
        base = *p;
        if (log) *log << "config: preset " << preset_name << "\n";
    }

    json merged = run_config_to_json(base);
    merge_logged(merged, file_json, "", log);

    RunConfig out;
    out.preset = preset_name;
    out.data = data_spec_from_json(merged.at("data"));
    out.model = model_config_from_json(merged.at("model"));
    return out;
}

RunConfig load_run_config(const std::string& path, const std::string& preset_override,
                          std::ostream* log) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return run_config_from_json(std::move(j), preset_override, log);
}

}  // namespace amd
