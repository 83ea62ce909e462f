// SPDX-License-Identifier: Apache-2.0
#include "amd/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace amd {

std::pair<Tensor, Tensor> assemble_batch(const WindowDataset& ds,
                                         const std::vector<std::size_t>& indices) {
    std::size_t l = ds.lookback(), t = ds.horizon(), c = ds.channels();
    std::vector<double> xs, ys, xw, yw;
    xs.reserve(indices.size() * l * c);
    ys.reserve(indices.size() * t * c);
    for (std::size_t i : indices) {
        ds.materialize(i, xw, yw);
        xs.insert(xs.end(), xw.begin(), xw.end());
        ys.insert(ys.end(), yw.begin(), yw.end());
    }
    return {Tensor::from_data({indices.size(), l, c}, std::move(xs)),
            Tensor::from_data({indices.size(), t, c}, std::move(ys))};
}

Metrics dataset_metrics(const AmdModel& model, const WindowDataset& ds, std::size_t batch_size,
                        std::size_t horizon_cap) {
    if (ds.size() == 0) throw DataError("metrics: empty dataset");
    NoGradGuard no_grad;
    std::size_t horizon = ds.horizon();
    std::size_t cap = horizon_cap == 0 ? horizon : std::min(horizon_cap, horizon);
    std::size_t c = ds.channels();

    double se = 0.0, ae = 0.0;
    std::size_t n = 0;
    for (std::size_t start = 0; start < ds.size(); start += batch_size) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(start + batch_size, ds.size()); ++i)
            idx.push_back(i);
        auto [x, y] = assemble_batch(ds, idx);
        Tensor pred = model.forward(x, nullptr).pred;
        const auto& pv = pred.values();
        const auto& yv = y.values();
        for (std::size_t b = 0; b < idx.size(); ++b)
            for (std::size_t s = 0; s < cap; ++s)
                for (std::size_t ch = 0; ch < c; ++ch) {
                    std::size_t off = (b * horizon + s) * c + ch;
                    double d = pv[off] - yv[off];
                    se += d * d;
                    ae += std::abs(d);
                    ++n;
                }
    }
    Metrics m;
    m.mse = se / static_cast<double>(n);
    m.mae = ae / static_cast<double>(n);
    return m;
}

TrainReport train_model(AmdModel& model, const WindowDataset& train_set,
                        const WindowDataset& val_set, const EpochCallback& cb) {
    if (train_set.size() == 0 || val_set.size() == 0)
        throw DataError("train: train and validation sets must be non-empty");
    const TrainConfig& tc = model.config().train;
    const LossConfig& lc = model.config().loss;

    Rng rng(tc.seed);
    AdamOptimizer opt(tc.learning_rate, tc.weight_decay);

    TrainReport report;
    report.initial_val_mse = dataset_metrics(model, val_set, tc.batch_size).mse;
    report.best_epoch = 0;
    report.best_val_mse = report.initial_val_mse;
    auto best_params = model.params().snapshot();

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    std::size_t m = model.config().ams.num_predictors;
    for (std::size_t epoch = 1; epoch <= tc.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t num_batches = 0;
        for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
            std::vector<std::size_t> idx(order.begin() + start,
                                         order.begin() +
                                             std::min(start + tc.batch_size, order.size()));
            auto [x, y] = assemble_batch(train_set, idx);
            ForwardResult fr = model.forward(x, &rng);
            Tensor gates = reshape(fr.gates, {idx.size() * model.config().channels, m});
            Tensor loss = total_loss(pred_loss(fr.pred, y),
                                     selector_balance_loss(gates, lc.epsilon, lc.per_row_balance),
                                     lc);
            double lv = loss.value();
            if (!std::isfinite(lv))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(num_batches));
            model.params().zero_grad();
            loss.backward();
            if (tc.grad_clip > 0.0) clip_grad_norm(model.params(), tc.grad_clip);
            opt.step(model.params());
            epoch_loss += lv;
            ++num_batches;
        }
        epoch_loss /= static_cast<double>(num_batches);
        double val = dataset_metrics(model, val_set, tc.batch_size).mse;
        report.train_loss.push_back(epoch_loss);
        report.val_mse.push_back(val);
        if (val < report.best_val_mse) {
            report.best_val_mse = val;
            report.best_epoch = epoch;
            best_params = model.params().snapshot();
        }
        if (cb) cb(epoch, epoch_loss, val);
    }

    model.params().restore(best_params);
    std::ostringstream rng_state;
    rng_state << rng;
    report.final_rng_state = rng_state.str();
    return report;
}

}  // namespace amd
