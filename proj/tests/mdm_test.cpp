// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "amd/grad_check.hpp"
#include "amd/mdm.hpp"
#include "test_util.hpp"

using namespace amd;
using test::random_tensor;

namespace {

// Straight-line recursion over plain vectors: pool the channel level by
// level, then mix coarse-to-fine with y = x*W per level. Independent of the
// tensor engine on purpose.
std::vector<double> mdm_linear_oracle(const std::vector<double>& x, std::size_t rate,
                                      std::size_t num_scales,
                                      const std::vector<std::vector<double>>& weights) {
    std::vector<std::vector<double>> taus{x};
    for (std::size_t i = 1; i < num_scales; ++i) {
        const auto& prev = taus.back();
        std::vector<double> next(prev.size() / rate, 0.0);
        for (std::size_t j = 0; j < next.size(); ++j) {
            for (std::size_t k = 0; k < rate; ++k) next[j] += prev[j * rate + k];
            next[j] /= static_cast<double>(rate);
        }
        taus.push_back(std::move(next));
    }
    std::vector<double> xi = taus.back();
    for (std::size_t i = num_scales - 1; i-- > 0;) {
        std::size_t in = taus[i + 1].size(), out = taus[i].size();
        std::vector<double> next(out, 0.0);
        for (std::size_t c = 0; c < out; ++c) {
            for (std::size_t r = 0; r < in; ++r) next[c] += xi[r] * weights[i][r * out + c];
            next[c] += taus[i][c];
        }
        xi = std::move(next);
    }
    return xi;
}

}  // namespace

TEST_CASE("downsampling block means") {
    Tensor x = Tensor::from_data({1, 4}, {1, 2, 3, 4});
    Tensor y = avg_downsample(x, 2);
    CHECK(y.values() == std::vector<double>{1.5, 3.5});

    Tensor x5 = Tensor::from_data({1, 5}, {1, 2, 3, 4, 5});
    CHECK(avg_downsample(x5, 2).values() == std::vector<double>{1.5, 3.5});

    Tensor c = Tensor::full({1, 8}, 7.0);
    Tensor pooled = avg_downsample(c, 4);
    for (double v : pooled.values()) CHECK(v == doctest::Approx(7.0));
}

TEST_CASE("zeroed mixers make the block the identity") {
    Rng rng(3);
    MdmConfig cfg;
    cfg.num_scales = 3;
    cfg.rate = 2;
    MdmParams p = make_mdm(cfg, 16, rng);
    for (auto& m : p.mixers) m.zero_weights();
    Tensor x = random_tensor({2, 16}, rng);
    Tensor u = mdm_forward(x, p);
    CHECK(test::max_abs_diff(x.values(), u.values()) == 0.0);
}

TEST_CASE("single scale is a pass-through") {
    Rng rng(5);
    MdmConfig cfg;
    cfg.num_scales = 1;
    MdmParams p = make_mdm(cfg, 8, rng);
    Tensor x = random_tensor({1, 8}, rng);
    Tensor u = mdm_forward(x, p);
    CHECK(x.values() == u.values());
}

TEST_CASE("linear mode matches the straight-line recursion oracle") {
    Rng rng(7);
    MdmConfig cfg;
    cfg.num_scales = 4;  // three pooled levels below the raw scale
    cfg.rate = 2;
    cfg.linear_mode = true;
    std::size_t lookback = 16;
    MdmParams p = make_mdm(cfg, lookback, rng);

    // known integer-ish weights per mixer
    std::vector<std::vector<double>> weights;
    for (std::size_t i = 0; i < p.mixers.size(); ++i) {
        auto& w = p.mixers[i].layers[0].weight;
        std::vector<double> vals(w.size());
        for (std::size_t j = 0; j < vals.size(); ++j)
            vals[j] = 0.25 * static_cast<double>((j % 5)) - 0.5;
        w.raw_data() = vals;
        weights.push_back(vals);
    }

    std::vector<double> ramp(lookback);
    for (std::size_t i = 0; i < lookback; ++i) ramp[i] = static_cast<double>(i + 1);
    Tensor x = Tensor::from_data({1, lookback}, ramp);
    Tensor u = mdm_forward(x, p);

    auto expect = mdm_linear_oracle(ramp, cfg.rate, cfg.num_scales, weights);
    CHECK(test::max_abs_diff(u.values(), expect) < 1e-12);
}

TEST_CASE("linear mode is homogeneous") {
    Rng rng(11);
    MdmConfig cfg;
    cfg.num_scales = 3;
    cfg.rate = 2;
    cfg.linear_mode = true;
    MdmParams p = make_mdm(cfg, 16, rng);
    Tensor x = random_tensor({2, 16}, rng);
    Tensor lhs = mdm_forward(mul_scalar(x, 3.7), p);
    Tensor rhs = mul_scalar(mdm_forward(x, p), 3.7);
    CHECK(test::max_abs_diff(lhs.values(), rhs.values()) < 1e-10);
}

TEST_CASE("output length always equals input length") {
    Rng rng(13);
    for (std::size_t scales : {1u, 2u, 3u}) {
        for (std::size_t lookback : {12u, 24u, 64u}) {
            MdmConfig cfg;
            cfg.num_scales = scales;
            cfg.rate = 2;
            MdmParams p = make_mdm(cfg, lookback, rng);
            Tensor x = random_tensor({3, lookback}, rng);
            CHECK(mdm_forward(x, p).shape() == Shape{3, lookback});
        }
    }
}

TEST_CASE("too-short input names the minimum length") {
    Rng rng(17);
    MdmConfig cfg;
    cfg.num_scales = 4;
    cfg.rate = 2;
    CHECK_THROWS_WITH_AS(make_mdm(cfg, 8, rng), doctest::Contains("minimum"), ShapeError);
}

TEST_CASE("channels share the mixer weights") {
    Rng rng(19);
    MdmConfig cfg;
    cfg.num_scales = 2;
    cfg.rate = 2;
    MdmParams p = make_mdm(cfg, 8, rng);
    Tensor row = random_tensor({1, 8}, rng);
    Tensor two = concat({row, row}, 0);
    Tensor u = mdm_forward(two, p);
    for (std::size_t j = 0; j < 8; ++j) CHECK(u.at(0, j) == doctest::Approx(u.at(1, j)));
}

TEST_CASE("mdm gradient check") {
    Rng rng(23);
    MdmConfig cfg;
    cfg.num_scales = 3;
    cfg.rate = 2;
    MdmParams p = make_mdm(cfg, 8, rng);
    Tensor x = random_tensor({2, 8}, rng);
    auto fn = [&p](const std::vector<Tensor>& in) {
        return sum_all(multiply(mdm_forward(in[0], p), in[1]));
    };
    Tensor w = random_tensor({2, 8}, rng);
    auto rep = grad_check(fn, {x, w}, 1e-6);
    CHECK(rep.max_rel_err < 1e-5);
}
