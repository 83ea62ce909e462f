// SPDX-License-Identifier: Apache-2.0
#include "amd/revin.hpp"

namespace amd {

RevinParams make_revin(std::size_t channels, bool affine, double eps) {
    RevinParams p;
    p.affine = affine;
    p.eps = eps;
    if (affine) {
        p.scale = Tensor::full({channels, 1}, 1.0);
        p.scale.set_requires_grad(true);
        p.bias = Tensor::zeros({channels, 1});
        p.bias.set_requires_grad(true);
    }
    return p;
}

void register_revin(ParamRegistry& reg, const std::string& prefix, const RevinParams& p) {
    if (!p.affine) return;
    reg.add(prefix + ".scale", p.scale);
    reg.add(prefix + ".bias", p.bias);
}

Tensor revin_norm(const Tensor& x, const RevinParams& p, RevinStats& stats) {
    if (x.rank() != 2) throw ShapeError("revin: expected C x L input, got " + shape_str(x.shape()));
    stats.mean = mean(x, 1, true);
    stats.std = clamp_min(sqrt(variance(x, 1, true)), p.eps);
    stats.valid = true;
    Tensor out = divide(subtract(x, stats.mean), stats.std);
    if (p.affine) out = add(multiply(out, p.scale), p.bias);
    return out;
}

Tensor revin_denorm(const Tensor& y, const RevinParams& p, const RevinStats& stats) {
    if (!stats.valid) throw Error("revin: denorm before any norm call");
    Tensor out = y;
    if (p.affine) out = divide(subtract(out, p.bias), p.scale);
    return add(multiply(out, stats.std), stats.mean);
}

}  // namespace amd
