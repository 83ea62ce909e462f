// SPDX-License-Identifier: Apache-2.0
#include "amd/pipeline.hpp"

#include <ostream>

namespace amd {

void check_channels(const AmdModel& model, const Series& series) {
    if (series.channels != model.config().channels)
        throw DataError("channel count mismatch: checkpoint expects " +
                        std::to_string(model.config().channels) + " channels, data has " +
                        std::to_string(series.channels));
}

TrainedArtifacts run_training(const RunConfig& cfg, const Series& series, std::ostream* log) {
    ModelConfig mc = cfg.model;
    mc.channels = series.channels;
    mc.validate();

    SplitBounds bounds = resolve_split(cfg.data.split, series.num_steps);
    auto [standardized, stats] = standardize(series, 0, bounds.train_end);
    SplitDatasets sets =
        split_windows(standardized, bounds, mc.lookback, mc.horizon, cfg.data.stride);

    TrainedArtifacts art{AmdModel(mc), {}, {}, {}, false};
    if (log)
        *log << "model: " << art.model.params().total_params() << " parameters, "
             << sets.train.size() << " train / " << sets.val.size() << " val windows\n";

    EpochCallback cb = nullptr;
    if (log) {
        std::ostream* out = log;
        cb = [out](std::size_t epoch, double loss, double val) {
            *out << "epoch " << epoch << ": train loss " << loss << ", val mse " << val << "\n";
        };
    }
    art.report = train_model(art.model, sets.train, sets.val, cb);

    art.meta.epoch = art.report.best_epoch;
    art.meta.best_val_mse = art.report.best_val_mse;
    art.meta.rng_state = art.report.final_rng_state;
    art.meta.norm_stats = stats;
    art.meta.channel_names = series.channel_names;
    art.meta.split = cfg.data.split;
    art.meta.has_header = cfg.data.has_header;
    art.meta.date_column = cfg.data.date_column;
    art.meta.stride = cfg.data.stride;

    if (sets.test.size() > 0) {
        art.test_metrics =
            dataset_metrics(art.model, sets.test, mc.train.batch_size);
        art.has_test = true;
    }
    return art;
}

Metrics evaluate_series(const AmdModel& model, const CheckpointMeta& meta, const Series& series,
                        std::size_t horizon_cap) {
    check_channels(model, series);
    const ModelConfig& mc = model.config();
    Series standardized = apply_standardize(series, meta.norm_stats);
    SplitBounds bounds = resolve_split(meta.split, series.num_steps);
    SplitDatasets sets =
        split_windows(standardized, bounds, mc.lookback, mc.horizon, meta.stride);
    if (sets.test.size() == 0) throw DataError("evaluate: test partition produced no windows");
    return dataset_metrics(model, sets.test, mc.train.batch_size, horizon_cap);
}

std::vector<double> predict_next(const AmdModel& model, const CheckpointMeta& meta,
                                 const Series& series) {
    check_channels(model, series);
    const ModelConfig& mc = model.config();
    if (series.num_steps < mc.lookback)
        throw DataError("predict: need at least " + std::to_string(mc.lookback) +
                        " rows of context, got " + std::to_string(series.num_steps));
    Series standardized = apply_standardize(series, meta.norm_stats);
    std::size_t start = series.num_steps - mc.lookback;
    std::vector<double> window(standardized.values.begin() +
                                   static_cast<std::ptrdiff_t>(start * series.channels),
                               standardized.values.end());
    NoGradGuard no_grad;
    Tensor x = Tensor::from_data({1, mc.lookback, mc.channels}, std::move(window));
    Tensor pred = model.forward(x, nullptr).pred;  // 1 x T x C, standardized space

    std::vector<double> out(pred.values());
    for (std::size_t t = 0; t < mc.horizon; ++t)
        for (std::size_t c = 0; c < mc.channels; ++c)
            out[t * mc.channels + c] =
                out[t * mc.channels + c] * meta.norm_stats.stddev[c] + meta.norm_stats.mean[c];
    return out;
}

std::vector<GateTraceRow> gate_trace(const AmdModel& model, const CheckpointMeta& meta,
                                     const Series& series) {
    check_channels(model, series);
    const ModelConfig& mc = model.config();
    Series standardized = apply_standardize(series, meta.norm_stats);
    WindowDataset ds = make_windows(standardized, mc.lookback, mc.horizon, meta.stride, 0,
                                    standardized.num_steps);
    NoGradGuard no_grad;
    std::vector<GateTraceRow> rows;
    rows.reserve(ds.size() * mc.channels);
    std::size_t batch = mc.train.batch_size;
    std::size_t m = mc.ams.num_predictors;
    for (std::size_t start = 0; start < ds.size(); start += batch) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(start + batch, ds.size()); ++i) idx.push_back(i);
        auto [x, y] = assemble_batch(ds, idx);
        Tensor gates = model.forward(x, nullptr).gates;  // B x C x m
        const auto& gv = gates.values();
        for (std::size_t b = 0; b < idx.size(); ++b)
            for (std::size_t c = 0; c < mc.channels; ++c) {
                GateTraceRow row;
                row.window = idx[b];
                row.channel = c;
                row.weights.assign(gv.begin() + static_cast<std::ptrdiff_t>((b * mc.channels + c) * m),
                                   gv.begin() + static_cast<std::ptrdiff_t>((b * mc.channels + c + 1) * m));
                rows.push_back(std::move(row));
            }
    }
    return rows;
}

}  // namespace amd
