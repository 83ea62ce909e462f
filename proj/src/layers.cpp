// SPDX-License-Identifier: Apache-2.0
#include "amd/layers.hpp"

#include <algorithm>
#include <cmath>

namespace amd {

Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng) {
    double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    return randu(std::move(shape), -bound, bound, rng);
}

Tensor randu(Shape shape, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> data(shape_numel(shape));
    for (auto& v : data) v = dist(rng);
    return Tensor::from_data(std::move(shape), std::move(data));
}

Tensor Linear::apply(const Tensor& x) const {
    Tensor y = matmul(x, weight);
    if (bias.defined()) y = add(y, bias);
    return y;
}

Linear make_linear(std::size_t in, std::size_t out, bool with_bias, Rng& rng) {
    Linear l;
    l.weight = init_uniform({in, out}, in, rng);
    l.weight.set_requires_grad(true);
    if (with_bias) {
        l.bias = init_uniform({1, out}, in, rng);
        l.bias.set_requires_grad(true);
    }
    return l;
}

Tensor FeedForward::apply(const Tensor& x) const {
    Tensor h = x;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        h = layers[i].apply(h);
        if (activation && i + 1 < layers.size()) h = gelu(h);
    }
    return h;
}

void FeedForward::zero_weights() {
    for (auto& l : layers) {
        std::fill(l.weight.raw_data().begin(), l.weight.raw_data().end(), 0.0);
        if (l.bias.defined())
            std::fill(l.bias.raw_data().begin(), l.bias.raw_data().end(), 0.0);
    }
}

FeedForward make_feedforward(std::size_t in, std::size_t hidden, std::size_t out, int depth,
                             bool activation, bool with_bias, Rng& rng) {
    if (depth != 1 && depth != 2) throw ConfigError("feedforward: depth must be 1 or 2");
    FeedForward ff;
    ff.activation = activation && depth == 2;
    if (depth == 1) {
        ff.layers.push_back(make_linear(in, out, with_bias, rng));
    } else {
        ff.layers.push_back(make_linear(in, hidden, with_bias, rng));
        ff.layers.push_back(make_linear(hidden, out, with_bias, rng));
    }
    return ff;
}

void ParamRegistry::add(const std::string& name, const Tensor& t) {
    if (!t.defined()) throw Error("registry: undefined tensor for " + name);
    if (index_.count(name)) throw Error("registry: duplicate parameter name " + name);
    index_[name] = items_.size();
    items_.emplace_back(name, t);
}

void ParamRegistry::add_linear(const std::string& prefix, const Linear& l) {
    add(prefix + ".weight", l.weight);
    if (l.bias.defined()) add(prefix + ".bias", l.bias);
}

void ParamRegistry::add_feedforward(const std::string& prefix, const FeedForward& ff) {
    for (std::size_t i = 0; i < ff.layers.size(); ++i)
        add_linear(prefix + ".fc" + std::to_string(i), ff.layers[i]);
}

Tensor* ParamRegistry::find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &items_[it->second].second;
}

std::vector<std::string> ParamRegistry::names() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const auto& [n, t] : items_) out.push_back(n);
    return out;
}

std::size_t ParamRegistry::total_params() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items_) n += t.size();
    return n;
}

void ParamRegistry::zero_grad() {
    for (auto& [name, t] : items_) t.zero_grad();
}

std::vector<std::vector<double>> ParamRegistry::snapshot() const {
    std::vector<std::vector<double>> snap;
    snap.reserve(items_.size());
    for (const auto& [name, t] : items_) snap.push_back(t.values());
    return snap;
}

void ParamRegistry::restore(const std::vector<std::vector<double>>& snap) {
    if (snap.size() != items_.size()) throw Error("registry: snapshot size mismatch");
    for (std::size_t i = 0; i < snap.size(); ++i) {
        if (snap[i].size() != items_[i].second.size())
            throw Error("registry: snapshot shape mismatch for " + items_[i].first);
        items_[i].second.raw_data() = snap[i];
    }
}

}  // namespace amd
