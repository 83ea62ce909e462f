// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: training, evaluation, forecasting, ablations,
// gate traces, the error-bound validator, gradient checks, and synthetic
// data generation. Machine-readable output goes to stdout as JSON (CSV for
// series and traces); diagnostics go to stderr.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric
// failure.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <json.hpp>

#include "amd/checkpoint.hpp"
#include "amd/config_io.hpp"
#include "amd/grad_check.hpp"
#include "amd/pipeline.hpp"
#include "amd/presets.hpp"
#include "amd/theory.hpp"

using namespace amd;
using nlohmann::json;

namespace {

std::size_t resolve_threads(std::size_t flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("AMD_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

Series load_series(const DataSpec& spec) {
    if (spec.path.empty()) throw ConfigError("no data path given (config data.path or --data)");
    return load_csv(spec.path, spec.has_header, spec.date_column);
}

json report_to_json(const TrainReport& r) {
    return json{{"epochs", r.train_loss.size()},
                {"train_loss", r.train_loss},
                {"val_mse", r.val_mse},
                {"initial_val_mse", r.initial_val_mse},
                {"best_epoch", r.best_epoch},
                {"best_val_mse", r.best_val_mse}};
}

int cmd_train(const std::string& config_path, const std::string& preset,
              const std::string& data_override, const std::string& out_path) {
    RunConfig cfg = load_run_config(config_path, preset, &std::cerr);
    if (!data_override.empty()) {
        std::cerr << "config: set data.path = " << data_override << " (command line)\n";
        cfg.data.path = data_override;
    }
    Series series = load_series(cfg.data);
    TrainedArtifacts art = run_training(cfg, series, &std::cerr);

    json out = report_to_json(art.report);
    if (art.has_test) {
        out["test_mse"] = art.test_metrics.mse;
        out["test_mae"] = art.test_metrics.mae;
    }
    if (!out_path.empty()) {
        save_checkpoint(art.model, art.meta, out_path);
        out["checkpoint"] = out_path;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_evaluate(const std::string& ckpt_path, const std::string& data_path,
                 std::size_t horizon) {
    LoadedCheckpoint loaded = load_checkpoint(ckpt_path);
    Series series = load_csv(data_path, loaded.meta.has_header, loaded.meta.date_column);
    if (horizon > loaded.model.config().horizon)
        throw ConfigError("--horizon " + std::to_string(horizon) +
                          " exceeds the checkpoint horizon " +
                          std::to_string(loaded.model.config().horizon));
    Metrics m = evaluate_series(loaded.model, loaded.meta, series, horizon);
    std::size_t scored = horizon == 0 ? loaded.model.config().horizon : horizon;
    json out{{"results", json::array({json{{"horizon", scored}, {"mse", m.mse}, {"mae", m.mae}}})}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& input_path,
                const std::string& out_path) {
    LoadedCheckpoint loaded = load_checkpoint(ckpt_path);
    Series series = load_csv(input_path, loaded.meta.has_header, loaded.meta.date_column);
    std::vector<double> forecast = predict_next(loaded.model, loaded.meta, series);
    Series out;
    out.num_steps = loaded.model.config().horizon;
    out.channels = loaded.model.config().channels;
    out.values = std::move(forecast);
    out.channel_names = loaded.meta.channel_names;
    write_csv(out, out_path);
    std::cerr << "wrote " << out.num_steps << " forecast rows to " << out_path << "\n";
    return 0;
}

int cmd_gates(const std::string& ckpt_path, const std::string& data_path,
              const std::string& out_path) {
    LoadedCheckpoint loaded = load_checkpoint(ckpt_path);
    Series series = load_csv(data_path, loaded.meta.has_header, loaded.meta.date_column);
    auto rows = gate_trace(loaded.model, loaded.meta, series);

    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write " + out_path);
    out << "window,channel";
    for (std::size_t j = 0; j < loaded.model.config().ams.num_predictors; ++j) out << ",w" << j;
    out << "\n";
    char buf[64];
    for (const auto& row : rows) {
        out << row.window << "," << row.channel;
        for (double w : row.weights) {
            std::snprintf(buf, sizeof(buf), "%.12g", w);
            out << "," << buf;
        }
        out << "\n";
    }
    std::cerr << "wrote " << rows.size() << " gate rows to " << out_path << "\n";
    return 0;
}

int cmd_ablate(const std::string& config_path, const std::string& preset,
               const std::string& mode, const std::string& data_override) {
    RunConfig base = load_run_config(config_path, preset, &std::cerr);
    if (!data_override.empty()) base.data.path = data_override;

    RunConfig variant = base;
    std::string label = mode;
    if (mode == "average") {
        variant.model.ams.mode = GateMode::Average;
    } else if (mode == "sparse") {
        variant.model.ams.mode = GateMode::Sparse;
    } else if (mode == "no-ddi") {
        variant.model.ablation.no_ddi = true;
    } else if (mode == "no-mdm") {
        variant.model.ablation.no_mdm = true;
    } else if (mode == "lambda1=0") {
        variant.model.loss.lambda1 = 0.0;
    } else if (mode.rfind("beta=", 0) == 0) {
        variant.model.ddi.channel_mix_scale = std::stod(mode.substr(5));
    } else {
        throw ConfigError("unknown ablation mode '" + mode +
                          "' (average|sparse|no-ddi|no-mdm|beta=<v>|lambda1=0)");
    }

    Series series = load_series(base.data);
    json rows = json::array();
    std::vector<std::pair<std::string, const RunConfig*>> runs{
        {gate_mode_to_string(base.model.ams.mode), &base}, {label, &variant}};
    for (const auto& [name, cfg] : runs) {
        std::cerr << "ablate: training " << name << "\n";
        TrainedArtifacts art = run_training(*cfg, series, nullptr);
        json row{{"mode", name}, {"best_val_mse", art.report.best_val_mse}};
        if (art.has_test) {
            row["test_mse"] = art.test_metrics.mse;
            row["test_mae"] = art.test_metrics.mae;
        }
        rows.push_back(row);
    }
    std::cout << json{{"ablation", rows}}.dump(2) << "\n";
    return 0;
}

int cmd_theorem_check(std::size_t period, std::size_t length, std::size_t horizon,
                      std::size_t trials, std::uint64_t seed, std::size_t depth, std::size_t rate,
                      const std::string& kind, const std::string& out_path,
                      std::size_t threads) {
    SmoothSeriesSpec spec;
    spec.kind = kind;
    spec.period = period;
    spec.length = length;
    spec.depth = depth;
    spec.rate = rate;
    BoundReport report = error_bound_check(spec, horizon, trials, seed, threads);
    json j = report.to_json();
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw DataError("cannot write " + out_path);
        out << j.dump(2) << "\n";
    }
    std::cout << j.dump(2) << "\n";
    if (!report.passed()) {
        std::cerr << "bound violated in " << report.violations.size() << " of " << report.checks
                  << " checks\n";
        return 3;
    }
    return 0;
}

ModelConfig gradcheck_toy_config() {
    ModelConfig cfg;
    cfg.lookback = 16;
    cfg.horizon = 4;
    cfg.channels = 2;
    cfg.mdm.num_scales = 2;
    cfg.ddi.patch_len = 4;
    cfg.ddi.channel_mix_scale = 0.5;
    cfg.ams.num_predictors = 2;
    cfg.ams.top_k = 1;
    cfg.ams.alpha = 1.0;
    cfg.ams.hidden = 32;
    cfg.ams.selector_hidden = 16;
    cfg.train.seed = 7;
    return cfg;
}

int cmd_gradcheck(bool full_model) {
    std::mt19937_64 rng(17);
    auto rand_tensor = [&rng](Shape shape, double lo, double hi) {
        std::uniform_real_distribution<double> dist(lo, hi);
        std::vector<double> data(shape_numel(shape));
        for (auto& v : data) v = dist(rng);
        return Tensor::from_data(std::move(shape), std::move(data));
    };

    json out;
    double worst = 0.0;

    {
        Rng prng(3);
        MdmConfig mc;
        mc.num_scales = 3;
        MdmParams mdm = make_mdm(mc, 16, prng);
        Tensor x = rand_tensor({2, 16}, -1, 1);
        Tensor w = rand_tensor({2, 16}, -1, 1);
        auto fn = [&](const std::vector<Tensor>& in) {
            return sum_all(multiply(mdm_forward(in[0], mdm), in[1]));
        };
        out["mdm"] = grad_check(fn, {x, w}).max_rel_err;
    }
    {
        Rng prng(5);
        DdiConfig dc;
        dc.patch_len = 4;
        dc.channel_mix_scale = 0.7;
        DdiParams ddi = make_ddi(dc, 8, 2, prng);
        Tensor x = rand_tensor({2, 8}, -1, 1);
        Tensor w = rand_tensor({2, 8}, -1, 1);
        auto fn = [&](const std::vector<Tensor>& in) {
            return sum_all(multiply(ddi_forward(in[0], ddi), in[1]));
        };
        out["ddi"] = grad_check(fn, {x, w}).max_rel_err;
    }
    {
        Rng prng(7);
        SelectorParams sel = make_selector(8, 3, 2, 1.0, 8, false, prng);
        ProjectionParams proj = make_projection(8, 4, 3, 8, prng);
        Tensor u = rand_tensor({1, 8}, -1, 1);
        Tensor w = rand_tensor({1, 4}, -1, 1);
        auto fn = [&](const std::vector<Tensor>& in) {
            AmsOutput r = ams_forward(in[0], in[0], sel, proj, GateMode::Dense, nullptr);
            return sum_all(multiply(r.pred, in[1]));
        };
        out["ams"] = grad_check(fn, {u, w}).max_rel_err;
    }
    {
        RevinParams revin = make_revin(2, true, 1e-5);
        Tensor x = rand_tensor({2, 12}, -2, 2);
        auto fn = [&](const std::vector<Tensor>& in) {
            RevinStats stats;
            Tensor normed = revin_norm(in[0], revin, stats);
            return sum_all(multiply(revin_denorm(normed, revin, stats), in[0]));
        };
        out["revin"] = grad_check(fn, {x}).max_rel_err;
    }
    {
        Tensor logits = rand_tensor({4, 3}, -1, 1);
        Tensor yhat = rand_tensor({2, 6}, -1, 1);
        Tensor y = rand_tensor({2, 6}, -1, 1);
        LossConfig lc;
        auto fn = [&](const std::vector<Tensor>& in) {
            return total_loss(pred_loss(in[0], y),
                              selector_balance_loss(softmax(in[1]), lc.epsilon), lc);
        };
        out["loss"] = grad_check(fn, {yhat, logits}).max_rel_err;
    }
    for (const auto& [k, v] : out.items()) worst = std::max(worst, v.get<double>());
    bool ok = worst < 1e-5;

    if (full_model) {
        ModelConfig cfg = gradcheck_toy_config();
        AmdModel model(cfg);
        Tensor x = rand_tensor({2, cfg.lookback, cfg.channels}, -1, 1);
        Tensor y = rand_tensor({2, cfg.horizon, cfg.channels}, -1, 1);
        std::vector<Tensor> params;
        for (auto& [name, t] : model.params().items()) params.push_back(t);
        auto fn = [&](const std::vector<Tensor>&) {
            Rng noise(99);
            ForwardResult fr = model.forward(x, &noise);
            Tensor gates = reshape(fr.gates, {2 * cfg.channels, cfg.ams.num_predictors});
            return total_loss(pred_loss(fr.pred, y),
                              selector_balance_loss(gates, cfg.loss.epsilon), cfg.loss);
        };
        double err = grad_check(fn, params).max_rel_err;
        out["full_model"] = err;
        ok = ok && err < 1e-4;
    }

    std::cout << out.dump(2) << "\n";
    if (!ok) {
        std::cerr << "gradient check failed (worst " << worst << ")\n";
        return 3;
    }
    return 0;
}

int cmd_synth(const std::string& kind, const std::string& out_path, std::size_t length,
              std::size_t channels, std::size_t period, double amplitude, double trend,
              double noise, std::uint64_t seed) {
    Series s = gen_synthetic(kind, length, channels, period, amplitude, trend, noise, seed);
    write_csv(s, out_path);
    std::cerr << "wrote " << s.num_steps << " x " << s.channels << " series to " << out_path
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-scale decomposition forecaster"};
    app.require_subcommand(1);
    app.fallthrough();  // accept global flags after the subcommand too

    std::size_t threads_flag = 0;
    app.add_option("--threads", threads_flag,
                   "worker threads for data loading and bound-check trials "
                   "(default: AMD_THREADS or 1)");

    auto* train = app.add_subcommand("train", "train a model from a config file");
    std::string config_path, preset, data_override, out_ckpt;
    train->add_option("--config", config_path, "run-config JSON")->required();
    train->add_option("--preset", preset, "named preset providing base values");
    train->add_option("--data", data_override, "override the data CSV path");
    train->add_option("--out", out_ckpt, "checkpoint output path");

    auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a CSV's test split");
    std::string eval_ckpt, eval_data;
    std::size_t eval_horizon = 0;
    evaluate->add_option("--ckpt", eval_ckpt, "checkpoint path")->required();
    evaluate->add_option("--data", eval_data, "CSV path")->required();
    evaluate->add_option("--horizon", eval_horizon, "score only the first H steps");

    auto* predict = app.add_subcommand("predict", "forecast past the end of a CSV");
    std::string pred_ckpt, pred_input, pred_out;
    predict->add_option("--ckpt", pred_ckpt, "checkpoint path")->required();
    predict->add_option("--input", pred_input, "input CSV")->required();
    predict->add_option("--out", pred_out, "forecast CSV output")->required();

    auto* ablate = app.add_subcommand("ablate", "train baseline and ablated variants");
    std::string abl_config, abl_preset, abl_mode, abl_data;
    ablate->add_option("--config", abl_config, "run-config JSON")->required();
    ablate->add_option("--preset", abl_preset, "named preset");
    ablate->add_option("--mode", abl_mode, "average|sparse|no-ddi|no-mdm|beta=<v>|lambda1=0")
        ->required();
    ablate->add_option("--data", abl_data, "override the data CSV path");

    auto* gates = app.add_subcommand("gates", "export per-window selector weights");
    std::string gate_ckpt, gate_data, gate_out;
    gates->add_option("--ckpt", gate_ckpt, "checkpoint path")->required();
    gates->add_option("--data", gate_data, "CSV path")->required();
    gates->add_option("--out", gate_out, "trace CSV output")->required();

    auto* theorem = app.add_subcommand("theorem-check", "run the error-bound property suite");
    std::size_t th_period = 24, th_length = 96, th_horizon = 48, th_trials = 100;
    std::size_t th_depth = 3, th_rate = 2;
    std::uint64_t th_seed = 7;
    std::string th_kind = "sine", th_out;
    theorem->add_option("--period", th_period, "generator period");
    theorem->add_option("--length", th_length, "look-back length");
    theorem->add_option("--horizon", th_horizon, "forecast horizon");
    theorem->add_option("--trials", th_trials, "number of random trials");
    theorem->add_option("--seed", th_seed, "base seed");
    theorem->add_option("--depth", th_depth, "pooling levels below the raw scale");
    theorem->add_option("--rate", th_rate, "downsampling rate");
    theorem->add_option("--kind", th_kind, "generator kind");
    theorem->add_option("--out", th_out, "also write the JSON report here");

    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient verification");
    bool gc_full = false;
    gradcheck->add_flag("--full-model", gc_full, "also check the assembled toy model");

    auto* synth = app.add_subcommand("synth", "generate a synthetic series CSV");
    std::string sy_kind = "sine", sy_out;
    std::size_t sy_length = 512, sy_channels = 1, sy_period = 24;
    double sy_amplitude = 1.0, sy_trend = 0.0, sy_noise = 0.0;
    std::uint64_t sy_seed = 1;
    synth->add_option("--kind", sy_kind, "sine|sine-plus-trend|multi-scale-mix");
    synth->add_option("--out", sy_out, "output CSV")->required();
    synth->add_option("--length", sy_length, "number of rows");
    synth->add_option("--channels", sy_channels, "number of channels");
    synth->add_option("--period", sy_period, "base period");
    synth->add_option("--amplitude", sy_amplitude, "amplitude");
    synth->add_option("--trend", sy_trend, "linear trend slope");
    synth->add_option("--noise", sy_noise, "gaussian noise sigma");
    synth->add_option("--seed", sy_seed, "rng seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    std::size_t threads = resolve_threads(threads_flag);
    try {
        if (*train) return cmd_train(config_path, preset, data_override, out_ckpt);
        if (*evaluate) return cmd_evaluate(eval_ckpt, eval_data, eval_horizon);
        if (*predict) return cmd_predict(pred_ckpt, pred_input, pred_out);
        if (*ablate) return cmd_ablate(abl_config, abl_preset, abl_mode, abl_data);
        if (*gates) return cmd_gates(gate_ckpt, gate_data, gate_out);
        if (*theorem)
            return cmd_theorem_check(th_period, th_length, th_horizon, th_trials, th_seed,
                                     th_depth, th_rate, th_kind, th_out, threads);
        if (*gradcheck) return cmd_gradcheck(gc_full);
        if (*synth)
            return cmd_synth(sy_kind, sy_out, sy_length, sy_channels, sy_period, sy_amplitude,
                             sy_trend, sy_noise, sy_seed);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
