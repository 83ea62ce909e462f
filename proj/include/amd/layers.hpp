// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "amd/tensor.hpp"

namespace amd {

using Rng = std::mt19937_64;

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization for weights and
// biases; the draw order is fixed so a seed pins every parameter.
Tensor init_uniform(Shape shape, std::size_t fan_in, Rng& rng);
Tensor randu(Shape shape, double lo, double hi, Rng& rng);

// x (rows x in) -> x*W + b with W (in x out), b broadcast across rows.
struct Linear {
    Tensor weight;
    Tensor bias;  // undefined when bias-free
    Tensor apply(const Tensor& x) const;
};

Linear make_linear(std::size_t in, std::size_t out, bool with_bias, Rng& rng);

// Two-layer GELU feedforward by default; depth 1 drops the hidden layer and
// the activation (a plain affine map, or a bare matrix when bias-free).
struct FeedForward {
    std::vector<Linear> layers;
    bool activation = true;
    Tensor apply(const Tensor& x) const;
    void zero_weights();  // residual-path tests
};

FeedForward make_feedforward(std::size_t in, std::size_t hidden, std::size_t out, int depth,
                             bool activation, bool with_bias, Rng& rng);

// Named trainable tensors in registration order. Names are unique; the
// order defines checkpoint manifests and optimizer slots.
class ParamRegistry {
public:
    void add(const std::string& name, const Tensor& t);
    void add_linear(const std::string& prefix, const Linear& l);
    void add_feedforward(const std::string& prefix, const FeedForward& ff);

    const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
    std::vector<std::pair<std::string, Tensor>>& items() { return items_; }
    Tensor* find(const std::string& name);
    std::vector<std::string> names() const;
    std::size_t total_params() const;
    void zero_grad();

    std::vector<std::vector<double>> snapshot() const;
    void restore(const std::vector<std::vector<double>>& snap);

private:
    std::vector<std::pair<std::string, Tensor>> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace amd
