// SPDX-License-Identifier: Apache-2.0
#include "amd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "amd/data.hpp"

namespace amd {

std::vector<std::vector<double>> multiscale_levels(const std::vector<double>& f, std::size_t rate,
                                                   std::size_t depth) {
    if (rate < 2) throw ShapeError("multiscale: rate must be at least 2");
    std::vector<std::vector<double>> levels{f};
    for (std::size_t i = 0; i < depth; ++i) {
        const auto& prev = levels.back();
        if (prev.size() < rate)
            throw ShapeError("multiscale: level " + std::to_string(i) + " too short to pool");
        std::vector<double> next(prev.size() / rate);
        for (std::size_t j = 0; j < next.size(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < rate; ++k) acc += prev[j * rate + k];
            next[j] = acc / static_cast<double>(rate);
        }
        levels.push_back(std::move(next));
    }
    return levels;
}

std::vector<double> multiscale_mixing_reference(const std::vector<double>& f, std::size_t rate,
                                                std::size_t depth,
                                                const std::vector<Matrix>& mixing) {
    if (mixing.size() != depth)
        throw ShapeError("multiscale: expected " + std::to_string(depth) + " mixing matrices");
    auto levels = multiscale_levels(f, rate, depth);
    std::vector<double> g = levels[depth];
    for (std::size_t i = depth; i-- > 0;) {
        const Matrix& w = mixing[i];
        if (w.rows != levels[i + 1].size() || w.cols != levels[i].size())
            throw ShapeError("multiscale: W_" + std::to_string(i) + " is " +
                             std::to_string(w.rows) + "x" + std::to_string(w.cols) +
                             ", expected " + std::to_string(levels[i + 1].size()) + "x" +
                             std::to_string(levels[i].size()));
        std::vector<double> next(levels[i].size());
        for (std::size_t c = 0; c < next.size(); ++c) {
            double acc = 0.0;
            for (std::size_t r = 0; r < w.rows; ++r) acc += g[r] * w.at(r, c);
            next[c] = levels[i][c] + acc;
        }
        g = std::move(next);
    }
    return g;
}

std::vector<double> periodic_linear_predictor(const std::vector<double>& g,
                                              std::size_t period, std::size_t horizon) {
    std::size_t len = g.size();
    if (len < period + 1)
        throw ShapeError("predictor: sequence length " + std::to_string(len) +
                         " must be at least period + 1 = " + std::to_string(period + 1));

    // Closed form, 1-based indices into g.
    std::vector<double> yhat(horizon);
    for (std::size_t t = 1; t <= horizon; ++t)
        yhat[t - 1] = g[t % period] - g[0] + g[period];

    // Explicit linear model: accumulate +1 at rows P+1 and (t%P)+1, -1 at
    // row 1, so overlapping assignments sum instead of clobbering.
    Matrix a;
    a.rows = len;
    a.cols = horizon;
    a.data.assign(len * horizon, 0.0);
    for (std::size_t t = 1; t <= horizon; ++t) {
        a.at(period, t - 1) += 1.0;
        a.at(t % period, t - 1) += 1.0;
        a.at(0, t - 1) -= 1.0;
    }
    for (std::size_t t = 0; t < horizon; ++t) {
        double acc = 0.0;
        for (std::size_t r = 0; r < len; ++r) acc += g[r] * a.at(r, t);
        if (std::abs(acc - yhat[t]) > 1e-12)
            throw NumericError("predictor: matrix route diverges from closed form at t=" +
                               std::to_string(t + 1));
    }
    return yhat;
}

double scan_lipschitz(const std::vector<double>& x) {
    double k = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) k = std::max(k, std::abs(x[i + 1] - x[i]));
    return k;
}

double SmoothSeriesSpec::lipschitz_bound() const {
    const double two_pi = 6.283185307179586476925286766559;
    double p = static_cast<double>(period);
    double base = amplitude * two_pi / p;  // |d/dt A sin(2 pi t / P)| <= 2 pi A / P
    if (kind == "sine") return base;
    if (kind == "sine-plus-trend") return base + std::abs(trend_slope);
    if (kind == "multi-scale-mix")
        return amplitude * two_pi * (1.0 / p + 1.0 / (4.0 * p) + 2.0 / (8.0 * p)) +
               std::abs(trend_slope);
    throw DataError("spec: unknown generator kind '" + kind + "'");
}

nlohmann::json BoundReport::to_json() const {
    nlohmann::json v = nlohmann::json::array();
    for (const auto& viol : violations)
        v.push_back({{"trial", viol.trial}, {"t", viol.t}, {"lhs", viol.lhs}, {"rhs", viol.rhs}});
    return nlohmann::json{{"trials", trials},
                          {"checks", checks},
                          {"violations", v},
                          {"num_violations", violations.size()},
                          {"max_ratio", max_ratio},
                          {"passed", passed()}};
}

namespace {

struct TrialResult {
    std::vector<BoundViolation> violations;
    double max_ratio = 0.0;
    std::size_t checks = 0;
};

TrialResult run_trial(const SmoothSeriesSpec& spec, std::size_t horizon, std::size_t trial,
                      std::uint64_t seed) {
    std::size_t total = spec.length + horizon;
    Series s = gen_synthetic(spec.kind, total, 1, spec.period, spec.amplitude, spec.trend_slope,
                             spec.noise_sigma, seed ^ (0x9e3779b97f4a7c15ull * (trial + 1)));
    std::vector<double> f = s.values;

    // Mixing matrices with entries in [-1/total, 1/total]; small enough that
    // the mixed sequence stays dominated by the generator.
    std::mt19937_64 rng(seed + 1315423911ull * (trial + 1));
    double bound = 1.0 / static_cast<double>(total);
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto levels = multiscale_levels(f, spec.rate, spec.depth);
    std::vector<Matrix> mixing(spec.depth);
    for (std::size_t i = 0; i < spec.depth; ++i) {
        mixing[i].rows = levels[i + 1].size();
        mixing[i].cols = levels[i].size();
        mixing[i].data.resize(mixing[i].rows * mixing[i].cols);
        for (auto& v : mixing[i].data) v = dist(rng);
    }

    std::vector<double> g = multiscale_mixing_reference(f, spec.rate, spec.depth, mixing);
    double k_mixed = scan_lipschitz(g);
    std::vector<double> lookback(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(spec.length));
    std::vector<double> yhat = periodic_linear_predictor(lookback, spec.period, horizon);

    TrialResult res;
    for (std::size_t t = 1; t <= horizon; ++t) {
        double truth = g[spec.length + t - 1];
        double lhs = std::abs(truth - yhat[t - 1]);
        double rhs = k_mixed * static_cast<double>(t + t % spec.period);
        res.checks++;
        if (rhs > 0.0) res.max_ratio = std::max(res.max_ratio, lhs / rhs);
        if (lhs > rhs) res.violations.push_back({trial, t, lhs, rhs});
    }
    return res;
}

}  // namespace

BoundReport error_bound_check(const SmoothSeriesSpec& spec, std::size_t horizon,
                              std::size_t trials, std::uint64_t seed, std::size_t threads) {
    if (spec.length < spec.period + 1)
        throw DataError("bound check: length must exceed the period");
    BoundReport report;
    report.trials = trials;

    std::vector<TrialResult> results(trials);
    if (threads <= 1 || trials <= 1) {
        for (std::size_t i = 0; i < trials; ++i) results[i] = run_trial(spec, horizon, i, seed);
    } else {
        std::size_t nthreads = std::min(threads, trials);
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < nthreads; ++w)
            pool.emplace_back([&, w]() {
                for (std::size_t i = w; i < trials; i += nthreads)
                    results[i] = run_trial(spec, horizon, i, seed);
            });
        for (auto& th : pool) th.join();
    }

    for (const auto& r : results) {
        report.checks += r.checks;
        report.max_ratio = std::max(report.max_ratio, r.max_ratio);
        report.violations.insert(report.violations.end(), r.violations.begin(),
                                 r.violations.end());
    }
    return report;
}

}  // namespace amd
