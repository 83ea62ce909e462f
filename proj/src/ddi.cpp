// SPDX-License-Identifier: Apache-2.0
#include "amd/ddi.hpp"

#include <cmath>

namespace amd {

std::size_t compute_d_model(std::size_t channels) {
    if (channels == 0) throw ConfigError("ddi: channel count must be positive");
    double r = std::round(std::log2(static_cast<double>(channels)));
    double p = std::pow(2.0, r);
    return static_cast<std::size_t>(std::max(32.0, p));
}

Tensor patchify(const Tensor& u, std::size_t patch_len) {
    if (u.rank() != 2) throw ShapeError("patchify: expected C x L, got " + shape_str(u.shape()));
    std::size_t c = u.dim(0), l = u.dim(1);
    if (patch_len == 0 || l % patch_len != 0)
        throw ShapeError("patchify: length " + std::to_string(l) +
                         " is not a multiple of patch length " + std::to_string(patch_len));
    return reshape(u, {c, l / patch_len, patch_len});
}

Tensor unpatchify(const Tensor& u_patched) {
    if (u_patched.rank() != 3)
        throw ShapeError("unpatchify: expected C x N x P, got " + shape_str(u_patched.shape()));
    return reshape(u_patched, {u_patched.dim(0), u_patched.dim(1) * u_patched.dim(2)});
}

DdiParams make_ddi(const DdiConfig& cfg, std::size_t lookback, std::size_t channels, Rng& rng) {
    if (cfg.patch_len == 0 || lookback % cfg.patch_len != 0)
        throw ConfigError("ddi: lookback " + std::to_string(lookback) +
                          " is not a multiple of patch length " + std::to_string(cfg.patch_len));
    DdiParams p;
    p.cfg = cfg;
    p.lookback = lookback;
    p.channels = channels;
    p.d_model = cfg.d_model_override ? cfg.d_model_override : compute_d_model(channels);
    for (std::size_t b = 0; b < cfg.num_blocks; ++b) {
        DdiBlockParams blk;
        blk.time_mix = make_feedforward(cfg.patch_len, p.d_model, cfg.patch_len, cfg.ff_depth,
                                        true, true, rng);
        blk.channel_mix =
            make_feedforward(channels, p.d_model, channels, cfg.ff_depth, true, true, rng);
        if (cfg.use_layer_norm) {
            blk.ln_gain = Tensor::full({lookback}, 1.0);
            blk.ln_gain.set_requires_grad(true);
            blk.ln_offset = Tensor::zeros({lookback});
            blk.ln_offset.set_requires_grad(true);
        }
        p.blocks.push_back(std::move(blk));
    }
    return p;
}

void register_ddi(ParamRegistry& reg, const std::string& prefix, const DdiParams& p) {
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
        std::string base = prefix + ".block" + std::to_string(b);
        reg.add_feedforward(base + ".time_mix", p.blocks[b].time_mix);
        reg.add_feedforward(base + ".channel_mix", p.blocks[b].channel_mix);
        if (p.cfg.use_layer_norm) {
            reg.add(base + ".ln.gain", p.blocks[b].ln_gain);
            reg.add(base + ".ln.offset", p.blocks[b].ln_offset);
        }
    }
}

Tensor ddi_block_forward(const Tensor& u, const DdiBlockParams& block, const DdiParams& p) {
    if (u.rank() != 2 || u.dim(0) != p.channels || u.dim(1) != p.lookback)
        throw ShapeError("ddi: expected " + std::to_string(p.channels) + " x " +
                         std::to_string(p.lookback) + " input, got " + shape_str(u.shape()));
    Tensor cur = u;
    if (p.cfg.use_layer_norm)
        cur = layer_norm(cur, block.ln_gain, block.ln_offset, 1e-5);

    std::size_t patch = p.cfg.patch_len;
    std::size_t num_patches = p.lookback / patch;

    // Patch 0 passes through; the recurrence starts at patch 1 and only ever
    // consumes earlier patches.
    std::vector<Tensor> out_patches;
    out_patches.reserve(num_patches);
    out_patches.push_back(slice(cur, 1, 0, patch));
    for (std::size_t q = 1; q < num_patches; ++q) {
        Tensor u_patch = slice(cur, 1, q * patch, patch);
        Tensor z = add(u_patch, block.time_mix.apply(out_patches[q - 1]));
        if (p.cfg.channel_mix_scale != 0.0) {
            Tensor cross = transpose(block.channel_mix.apply(transpose(z)));
            z = add(z, mul_scalar(cross, p.cfg.channel_mix_scale));
        }
        out_patches.push_back(std::move(z));
    }
    return concat(out_patches, 1);
}

Tensor ddi_forward(const Tensor& u, const DdiParams& p) {
    Tensor cur = u;
    for (const auto& block : p.blocks) cur = ddi_block_forward(cur, block, p);
    return cur;
}

}  // namespace amd
