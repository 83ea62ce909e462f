// SPDX-License-Identifier: Apache-2.0
//
// Executable error-bound validation for multi-scale mixed linear
// forecasting. Everything here is straight-line code over plain vectors,
// deliberately independent of the tensor engine and the mixing block it
// cross-checks: the reference recursion pools the series level by level and
// mixes coarse-to-fine through fixed matrices; the periodic linear predictor
// is materialized both as a closed form and as an explicit L x T matrix; the
// bound check asserts |y_t - yhat_t| <= K * (t + t mod P) with K the scanned
// successive-difference constant of the mixed sequence.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "amd/errors.hpp"

namespace amd {

struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;  // row-major
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

// Level i+1 is the truncating block mean of level i; returns levels 0..n.
std::vector<std::vector<double>> multiscale_levels(const std::vector<double>& f, std::size_t rate,
                                                   std::size_t depth);

// g_n = f_n, then g_i = f_i + g_{i+1} * W_i for i = n-1 .. 0; returns g_0.
// W_i must map the level-(i+1) length to the level-i length.
std::vector<double> multiscale_mixing_reference(const std::vector<double>& f, std::size_t rate,
                                                std::size_t depth,
                                                const std::vector<Matrix>& mixing);

// Periodic linear continuation: yhat_t = g(t%P+1) - g(1) + g(P+1) in 1-based
// indexing, for t = 1..horizon. Also materializes the explicit L x T matrix
// with +1/-1/0 entries and verifies both routes agree to 1e-12.
std::vector<double> periodic_linear_predictor(const std::vector<double>& g,
                                              std::size_t period, std::size_t horizon);

// max over i of |x[i+1] - x[i]|
double scan_lipschitz(const std::vector<double>& x);

struct SmoothSeriesSpec {
    std::string kind = "sine";  // generator kind, see gen_synthetic
    std::size_t period = 24;
    std::size_t length = 96;  // look-back portion
    std::size_t depth = 3;    // pooling levels below the raw scale
    std::size_t rate = 2;
    double amplitude = 1.0;
    double trend_slope = 0.0;
    double noise_sigma = 0.0;

    // Analytic successive-difference bound of the generator.
    double lipschitz_bound() const;
};

struct BoundViolation {
    std::size_t trial = 0, t = 0;
    double lhs = 0.0, rhs = 0.0;
};

struct BoundReport {
    std::size_t trials = 0;
    std::size_t checks = 0;
    std::vector<BoundViolation> violations;
    double max_ratio = 0.0;  // max lhs/rhs seen
    bool passed() const { return violations.empty(); }
    nlohmann::json to_json() const;
};

// Per trial: draw bounded random mixing matrices, build the mixed sequence
// over length + horizon points, scan its constant, predict from the
// look-back and compare the continuation against the bound.
BoundReport error_bound_check(const SmoothSeriesSpec& spec, std::size_t horizon,
                              std::size_t trials, std::uint64_t seed,
                              std::size_t threads = 1);

}  // namespace amd
