// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "amd/data.hpp"
#include "amd/mdm.hpp"
#include "amd/theory.hpp"
#include "test_util.hpp"

using namespace amd;

TEST_CASE("mixing recursion with zero matrices collapses to the input") {
    Series s = gen_synthetic("sine", 32, 1, 8, 1.0, 0.0, 0.0, 3);
    std::vector<Matrix> w(2);
    auto levels = multiscale_levels(s.values, 2, 2);
    for (std::size_t i = 0; i < 2; ++i) {
        w[i].rows = levels[i + 1].size();
        w[i].cols = levels[i].size();
        w[i].data.assign(w[i].rows * w[i].cols, 0.0);
    }
    auto g = multiscale_mixing_reference(s.values, 2, 2, w);
    CHECK(test::max_abs_diff(g, s.values) == 0.0);
}

TEST_CASE("single-level mixing hand evaluation") {
    std::vector<double> f{1, 2, 3, 4};
    std::vector<Matrix> w(1);
    w[0].rows = 2;
    w[0].cols = 4;
    w[0].data.assign(8, 1.0);
    auto g = multiscale_mixing_reference(f, 2, 1, w);
    // f1 = [1.5, 3.5]; g1*W = [5,5,5,5]; g0 = f + that
    std::vector<double> expect{6, 7, 8, 9};
    CHECK(test::max_abs_diff(g, expect) < 1e-15);
}

TEST_CASE("mixing recursion agrees with the linear-mode mixing block") {
    Rng rng(5);
    std::size_t lookback = 32, depth = 3, rate = 2;
    MdmConfig cfg;
    cfg.num_scales = depth + 1;
    cfg.rate = rate;
    cfg.linear_mode = true;
    MdmParams params = make_mdm(cfg, lookback, rng);

    Series s = gen_synthetic("sine-plus-trend", lookback, 1, 8, 1.0, 0.02, 0.1, 7);
    auto levels = multiscale_levels(s.values, rate, depth);
    std::vector<Matrix> w(depth);
    std::mt19937_64 wrng(11);
    std::uniform_real_distribution<double> dist(-0.2, 0.2);
    for (std::size_t i = 0; i < depth; ++i) {
        w[i].rows = levels[i + 1].size();
        w[i].cols = levels[i].size();
        w[i].data.resize(w[i].rows * w[i].cols);
        for (auto& v : w[i].data) v = dist(wrng);
        params.mixers[i].layers[0].weight.raw_data() = w[i].data;
    }

    auto reference = multiscale_mixing_reference(s.values, rate, depth, w);
    Tensor block = mdm_forward(Tensor::from_data({1, lookback}, s.values), params);
    CHECK(test::max_abs_diff(block.values(), reference) < 1e-12);
}

TEST_CASE("downsampling never raises the per-raw-step constant") {
    // Consecutive level-i entries are rate^i raw steps apart, so the
    // comparable constant is the scan divided by that stride: block means of
    // a K-rate sequence differ by at most stride*K via telescoping.
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        Series s = gen_synthetic("multi-scale-mix", 96, 1, 12, 1.0, 0.01,
                                 0.05 * (trial % 3), 100 + trial);
        auto levels = multiscale_levels(s.values, 2, 3);
        double base = scan_lipschitz(levels[0]);
        double stride = 1.0;
        for (std::size_t i = 1; i < levels.size(); ++i) {
            stride *= 2.0;
            CHECK(scan_lipschitz(levels[i]) / stride <= base + 1e-12);
        }
    }
}

TEST_CASE("periodic continuation predictor") {
    SUBCASE("exactly periodic input continues itself") {
        std::size_t period = 6, len = 24;
        std::vector<double> g(len);
        for (std::size_t i = 0; i < len; ++i)
            g[i] = std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(i) / 6.0);
        auto yhat = periodic_linear_predictor(g, period, 12);
        for (std::size_t t = 1; t <= 12; ++t)
            CHECK(yhat[t - 1] == doctest::Approx(g[t % period]).epsilon(1e-12));
    }
    SUBCASE("constants continue as constants") {
        std::vector<double> g(20, 3.25);
        for (double v : periodic_linear_predictor(g, 5, 8)) CHECK(v == doctest::Approx(3.25));
    }
    SUBCASE("matrix route agrees with the closed form on random input") {
        // periodic_linear_predictor cross-checks the explicit matrix internally and
        // throws on divergence, so surviving random inputs is the assertion.
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> g(40);
            for (auto& v : g) v = dist(rng);
            CHECK_NOTHROW(periodic_linear_predictor(g, 7, 20));
        }
    }
    SUBCASE("too-short sequences are rejected") {
        std::vector<double> g(5, 1.0);
        CHECK_THROWS_AS(periodic_linear_predictor(g, 5, 4), ShapeError);
    }
}

TEST_CASE("generator lipschitz bounds hold by scan") {
    for (const char* kind : {"sine", "sine-plus-trend", "multi-scale-mix"}) {
        SmoothSeriesSpec spec;
        spec.kind = kind;
        spec.period = 24;
        spec.length = 96;
        spec.trend_slope = 0.01;
        Series s = gen_synthetic(spec.kind, spec.length, 1, spec.period, spec.amplitude,
                                 spec.trend_slope, 0.0, 23);
        CHECK(scan_lipschitz(s.values) <= spec.lipschitz_bound() + 1e-12);
    }
}

TEST_CASE("bound check passes on a pure sine with zero mixing") {
    SmoothSeriesSpec spec;
    spec.period = 24;
    spec.length = 96;
    spec.depth = 0;  // no mixing matrices at all
    BoundReport r = error_bound_check(spec, 48, 3, 7);
    CHECK(r.passed());
    CHECK(r.max_ratio <= 1.0);
    CHECK(r.checks == 3 * 48);
}

TEST_CASE("bound check on constants is trivially satisfied") {
    SmoothSeriesSpec spec;
    spec.period = 8;
    spec.length = 32;
    spec.amplitude = 0.0;
    spec.depth = 2;
    BoundReport r = error_bound_check(spec, 16, 5, 11);
    CHECK(r.passed());
}

TEST_CASE("the acceptance-scale property sweep reports zero violations") {
    SmoothSeriesSpec spec;
    spec.period = 24;
    spec.length = 96;
    spec.depth = 3;
    BoundReport r = error_bound_check(spec, 48, 100, 7);
    CHECK(r.trials == 100);
    CHECK(r.violations.empty());
    CHECK(r.checks == 100 * 48);

    SUBCASE("threaded execution returns the same report") {
        BoundReport r4 = error_bound_check(spec, 48, 100, 7, 4);
        CHECK(r4.max_ratio == doctest::Approx(r.max_ratio).epsilon(1e-15));
        CHECK(r4.violations.size() == r.violations.size());
    }
}

TEST_CASE("bound report serializes") {
    SmoothSeriesSpec spec;
    spec.period = 12;
    spec.length = 48;
    spec.depth = 2;
    BoundReport r = error_bound_check(spec, 12, 4, 3);
    auto j = r.to_json();
    CHECK(j["trials"] == 4);
    CHECK(j["passed"] == r.passed());
    CHECK(j.contains("max_ratio"));
}
