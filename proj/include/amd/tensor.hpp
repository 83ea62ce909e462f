// SPDX-License-Identifier: Apache-2.0
//
// Dense double-precision tensors with reverse-mode automatic differentiation.
//
// The graph is define-by-run: while autograd is enabled, every primitive
// whose operands require a gradient records a backward closure plus parent
// links on its output. backward() on a scalar walks the reachable closures
// once, in reverse recording order, accumulating gradients additively into
// every leaf that requires them, then frees the closures. Running backward
// twice over the same recorded graph is an error.
//
// Tensors are row-major, 64-bit floats throughout. A rank-0 tensor (empty
// shape) is a scalar. Tensors that participate in a recorded graph must not
// be mutated until backward has consumed the graph; parameter updates happen
// between passes.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "amd/errors.hpp"

namespace amd {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

namespace detail {

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    bool requires_grad = false;
    std::vector<double> grad;  // empty until first accumulation
    std::vector<std::shared_ptr<TensorImpl>> parents;
    std::function<void(TensorImpl&)> backward_fn;  // null for leaves
    std::uint64_t seq = 0;   // recording order, 0 for leaves
    bool consumed = false;   // backward already ran through this node
};

void ensure_grad(TensorImpl& t);
bool autograd_enabled();

}  // namespace detail

// Disables graph recording for its lifetime (evaluation passes, finite
// differences). Nestable.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape);
    static Tensor full(Shape shape, double value);
    static Tensor scalar(double value);
    static Tensor from_data(Shape shape, std::vector<double> data);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t i) const;
    std::size_t size() const;  // number of elements

    const std::vector<double>& values() const;
    std::vector<double>& raw_data();  // leaf mutation between passes only
    double value() const;             // scalar tensors
    double at(std::size_t i) const;
    double at(std::size_t i, std::size_t j) const;

    // Marks this leaf as trainable. Calling it on a recorded (non-leaf)
    // tensor is an error.
    Tensor& set_requires_grad(bool flag = true);
    bool requires_grad() const;

    bool has_grad() const;
    const std::vector<double>& grad() const;  // throws if absent
    void zero_grad();

    Tensor detach() const;  // value copy, no graph, no grad flag

    // Reverse-mode sweep from a scalar output. Populates grad on every
    // reachable leaf with requires_grad; accumulation is additive.
    void backward();

    std::shared_ptr<detail::TensorImpl> impl() const { return impl_; }
    explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<detail::TensorImpl> impl_;
};

// --- primitive inventory -------------------------------------------------
// Elementwise binaries broadcast numpy-style (right-aligned, size-1 dims
// stretch); gradients reduce back over the stretched axes.
Tensor matmul(const Tensor& a, const Tensor& b);  // rank-2 only
Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);

Tensor transpose(const Tensor& a);  // swaps the last two dims
Tensor reshape(const Tensor& a, Shape shape);
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t len);

Tensor sum(const Tensor& a, std::size_t axis, bool keepdim = true);
Tensor mean(const Tensor& a, std::size_t axis, bool keepdim = true);
Tensor variance(const Tensor& a, std::size_t axis, bool keepdim = true);  // population
Tensor sum_all(const Tensor& a);   // rank-0 result
Tensor mean_all(const Tensor& a);  // rank-0 result

Tensor softmax(const Tensor& a);  // over last axis
Tensor softplus(const Tensor& a);
Tensor log(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor sqrt(const Tensor& a);
Tensor gelu(const Tensor& a);  // tanh approximation
Tensor clamp_min(const Tensor& a, double floor);

// Truncating average pooling over the last axis: kernel == stride == k,
// remainder entries dropped.
Tensor avg_pool1d(const Tensor& a, std::size_t k);

// Layer normalization over the last axis with learnable affine; gain and
// offset must have as many elements as the last axis.
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& offset, double eps = 1e-5);

// Gathers columns along the last axis; one index list per row. Indices are
// constants: gradients scatter-add into the gathered positions only.
Tensor gather_last(const Tensor& a, const std::vector<std::vector<std::size_t>>& indices);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return subtract(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return multiply(a, b); }
inline Tensor operator/(const Tensor& a, const Tensor& b) { return divide(a, b); }
inline Tensor operator+(const Tensor& a, double c) { return add_scalar(a, c); }
inline Tensor operator-(const Tensor& a, double c) { return add_scalar(a, -c); }
inline Tensor operator*(const Tensor& a, double c) { return mul_scalar(a, c); }
inline Tensor operator*(double c, const Tensor& a) { return mul_scalar(a, c); }

}  // namespace amd
