// SPDX-License-Identifier: Apache-2.0
#include "amd/mdm.hpp"

#include <cmath>

namespace amd {

namespace {

std::size_t pow_size(std::size_t base, std::size_t e) {
    std::size_t out = 1;
    for (std::size_t i = 0; i < e; ++i) out *= base;
    return out;
}

void check_lookback(const MdmConfig& cfg, std::size_t lookback) {
    if (cfg.num_scales == 0) throw ConfigError("mdm: num_scales must be at least 1");
    if (cfg.rate < 2 && cfg.num_scales > 1)
        throw ConfigError("mdm: downsampling rate must be at least 2");
    std::size_t min_len = pow_size(cfg.rate, cfg.num_scales);
    if (cfg.num_scales > 1 && lookback < min_len)
        throw ShapeError("mdm: lookback " + std::to_string(lookback) + " below minimum " +
                         std::to_string(min_len) + " for num_scales=" +
                         std::to_string(cfg.num_scales) + ", rate=" + std::to_string(cfg.rate));
}

}  // namespace

Tensor avg_downsample(const Tensor& x, std::size_t rate) { return avg_pool1d(x, rate); }

MdmParams make_mdm(const MdmConfig& cfg, std::size_t lookback, Rng& rng) {
    check_lookback(cfg, lookback);
    MdmParams p;
    p.cfg = cfg;
    p.lookback = lookback;
    std::size_t len = lookback;
    std::vector<std::size_t> lengths{len};
    for (std::size_t i = 1; i < cfg.num_scales; ++i) {
        len /= cfg.rate;
        lengths.push_back(len);
    }
    for (std::size_t i = 0; i + 1 < cfg.num_scales; ++i) {
        std::size_t in = lengths[i + 1], out = lengths[i];
        // hidden width follows the target-scale length
        p.mixers.push_back(cfg.linear_mode
                               ? make_feedforward(in, out, out, 1, false, false, rng)
                               : make_feedforward(in, out, out, 2, true, true, rng));
    }
    return p;
}

void register_mdm(ParamRegistry& reg, const std::string& prefix, const MdmParams& p) {
    for (std::size_t i = 0; i < p.mixers.size(); ++i)
        reg.add_feedforward(prefix + ".mix" + std::to_string(i), p.mixers[i]);
}

Tensor mdm_forward(const Tensor& x, const MdmParams& p) {
    if (x.rank() != 2) throw ShapeError("mdm: expected C x L input, got " + shape_str(x.shape()));
    if (x.dim(1) != p.lookback)
        throw ShapeError("mdm: input length " + std::to_string(x.dim(1)) +
                         " does not match configured lookback " + std::to_string(p.lookback));
    check_lookback(p.cfg, x.dim(1));

    std::vector<Tensor> scales{x};
    for (std::size_t i = 1; i < p.cfg.num_scales; ++i)
        scales.push_back(avg_downsample(scales.back(), p.cfg.rate));

    Tensor mixed = scales.back();
    for (std::size_t i = p.cfg.num_scales - 1; i-- > 0;)
        mixed = add(scales[i], p.mixers[i].apply(mixed));
    return mixed;
}

}  // namespace amd
