// SPDX-License-Identifier: Apache-2.0
#include "amd/loss.hpp"

#include <cmath>

namespace amd {

Tensor pred_loss(const Tensor& y_hat, const Tensor& y) {
    if (y_hat.shape() != y.shape())
        throw ShapeError("pred_loss: shape mismatch " + shape_str(y_hat.shape()) + " vs " +
                         shape_str(y.shape()));
    Tensor diff = subtract(y_hat, y);
    return mean_all(multiply(diff, diff));
}

Tensor selector_balance_loss(const Tensor& gates, double eps, bool per_row) {
    if (gates.rank() != 2) throw ShapeError("balance_loss: expected B x m gate matrix");
    if (gates.dim(0) == 0) throw DataError("balance_loss: empty batch");
    if (per_row) {
        Tensor v = variance(gates, 1, true);
        Tensor mu = mean(gates, 1, true);
        Tensor ratio = divide(v, add_scalar(multiply(mu, mu), eps));
        return mean_all(ratio);
    }
    Tensor importance = sum(gates, 0, true);  // 1 x m
    Tensor v = variance(importance, 1, true);
    Tensor mu = mean(importance, 1, true);
    return reshape(divide(v, add_scalar(multiply(mu, mu), eps)), {});
}

Tensor total_loss(const Tensor& pred, const Tensor& balance, const LossConfig& cfg) {
    if (!std::isfinite(pred.value()) || !std::isfinite(balance.value()))
        throw NumericError("total_loss: non-finite component (pred=" +
                           std::to_string(pred.value()) + ", balance=" +
                           std::to_string(balance.value()) + ")");
    if (cfg.lambda1 == 0.0) return pred;
    return add(pred, mul_scalar(balance, cfg.lambda1));
}

Metrics evaluate_metrics(const std::vector<double>& y_hat, const std::vector<double>& y) {
    if (y_hat.size() != y.size() || y.empty())
        throw ShapeError("metrics: size mismatch or empty input");
    Metrics m;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double d = y_hat[i] - y[i];
        m.mse += d * d;
        m.mae += std::abs(d);
    }
    m.mse /= static_cast<double>(y.size());
    m.mae /= static_cast<double>(y.size());
    return m;
}

}  // namespace amd
