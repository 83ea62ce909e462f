// SPDX-License-Identifier: Apache-2.0
#include "amd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <unordered_set>

namespace amd {

std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << ",";
        os << s[i];
    }
    os << ")";
    return os.str();
}

namespace detail {

namespace {
thread_local bool g_autograd_enabled = true;
thread_local std::uint64_t g_seq_counter = 0;
}  // namespace

bool autograd_enabled() { return g_autograd_enabled; }

void ensure_grad(TensorImpl& t) {
    if (t.grad.empty()) t.grad.assign(t.data.size(), 0.0);
}

}  // namespace detail

NoGradGuard::NoGradGuard() : prev_(detail::g_autograd_enabled) {
    detail::g_autograd_enabled = false;
}

NoGradGuard::~NoGradGuard() { detail::g_autograd_enabled = prev_; }

using detail::TensorImpl;

// --- Tensor --------------------------------------------------------------

Tensor Tensor::zeros(Shape shape) {
    auto impl = std::make_shared<TensorImpl>();
    impl->data.assign(shape_numel(shape), 0.0);
    impl->shape = std::move(shape);
    return Tensor(std::move(impl));
}

Tensor Tensor::full(Shape shape, double value) {
    auto impl = std::make_shared<TensorImpl>();
    impl->data.assign(shape_numel(shape), value);
    impl->shape = std::move(shape);
    return Tensor(std::move(impl));
}

Tensor Tensor::scalar(double value) { return full({}, value); }

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
    if (shape_numel(shape) != data.size())
        throw ShapeError("tensor: shape " + shape_str(shape) + " does not hold " +
                         std::to_string(data.size()) + " values");
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    return Tensor(std::move(impl));
}

static const TensorImpl& deref(const std::shared_ptr<TensorImpl>& p) {
    if (!p) throw Error("tensor: use of a default-constructed tensor");
    return *p;
}

const Shape& Tensor::shape() const { return deref(impl_).shape; }

std::size_t Tensor::dim(std::size_t i) const {
    const auto& s = shape();
    if (i >= s.size()) throw ShapeError("tensor: dim index out of range");
    return s[i];
}

std::size_t Tensor::size() const { return deref(impl_).data.size(); }

const std::vector<double>& Tensor::values() const { return deref(impl_).data; }

std::vector<double>& Tensor::raw_data() {
    deref(impl_);
    return impl_->data;
}

double Tensor::value() const {
    if (size() != 1) throw ShapeError("tensor: value() on non-scalar " + shape_str(shape()));
    return values()[0];
}

double Tensor::at(std::size_t i) const { return values().at(i); }

double Tensor::at(std::size_t i, std::size_t j) const {
    if (rank() != 2) throw ShapeError("tensor: at(i,j) needs rank 2, got " + shape_str(shape()));
    return values()[i * dim(1) + j];
}

Tensor& Tensor::set_requires_grad(bool flag) {
    deref(impl_);
    if (impl_->backward_fn) throw Error("tensor: requires_grad is settable on leaves only");
    impl_->requires_grad = flag;
    return *this;
}

bool Tensor::requires_grad() const { return deref(impl_).requires_grad; }

bool Tensor::has_grad() const { return !deref(impl_).grad.empty(); }

const std::vector<double>& Tensor::grad() const {
    if (!has_grad()) throw Error("tensor: gradient not populated");
    return impl_->grad;
}

void Tensor::zero_grad() {
    deref(impl_);
    impl_->grad.clear();
}

Tensor Tensor::detach() const {
    return Tensor::from_data(shape(), values());
}

void Tensor::backward() {
    deref(impl_);
    if (size() != 1)
        throw ShapeError("backward: output must be scalar, got " + shape_str(shape()));
    if (impl_->consumed) throw Error("backward: graph already freed");
    if (!impl_->requires_grad)
        throw Error("backward: output does not depend on any tensor requiring grad");

    // Collect reachable recorded nodes, then replay strictly by descending
    // sequence number (reverse recording order, each node exactly once).
    std::vector<TensorImpl*> nodes;
    std::unordered_set<TensorImpl*> seen;
    std::vector<TensorImpl*> stack{impl_.get()};
    seen.insert(impl_.get());
    while (!stack.empty()) {
        TensorImpl* cur = stack.back();
        stack.pop_back();
        if (cur->backward_fn) nodes.push_back(cur);
        for (const auto& p : cur->parents) {
            if (p && p->requires_grad && seen.insert(p.get()).second) stack.push_back(p.get());
        }
    }
    std::sort(nodes.begin(), nodes.end(),
              [](const TensorImpl* a, const TensorImpl* b) { return a->seq > b->seq; });

    detail::ensure_grad(*impl_);
    impl_->grad[0] += 1.0;
    for (TensorImpl* n : nodes) {
        n->backward_fn(*n);
        n->backward_fn = nullptr;
        n->consumed = true;
    }
    impl_->consumed = true;
}

// --- recording helper ----------------------------------------------------

namespace {

Tensor make_result(Shape shape, std::vector<double> data, std::vector<Tensor> parents,
                   std::function<void(TensorImpl&)> backward) {
    auto impl = std::make_shared<TensorImpl>();
    impl->shape = std::move(shape);
    impl->data = std::move(data);
    bool record = detail::autograd_enabled();
    if (record) {
        bool any = false;
        for (const auto& p : parents) any = any || p.requires_grad();
        record = any;
    }
    if (record) {
        impl->requires_grad = true;
        impl->parents.reserve(parents.size());
        for (auto& p : parents) impl->parents.push_back(p.impl());
        impl->backward_fn = std::move(backward);
        impl->seq = ++detail::g_seq_counter;
    }
    return Tensor(std::move(impl));
}

bool needs(const std::shared_ptr<TensorImpl>& p) { return p && p->requires_grad; }

// Broadcast plan: per output dimension, the element stride of each operand
// (0 where that operand is stretched).
struct BcastPlan {
    Shape out;
    std::vector<std::size_t> stride_a, stride_b;
    bool same_shape = false;
};

BcastPlan make_bcast(const Shape& a, const Shape& b, const char* op) {
    BcastPlan plan;
    if (a == b) {
        plan.out = a;
        plan.same_shape = true;
        return plan;
    }
    std::size_t rank = std::max(a.size(), b.size());
    plan.out.assign(rank, 1);
    for (std::size_t i = 0; i < rank; ++i) {
        std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
        std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
        if (da != db && da != 1 && db != 1)
            throw ShapeError(std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b) +
                             " do not broadcast");
        plan.out[i] = std::max(da, db);
    }
    auto strides_for = [&](const Shape& s) {
        std::vector<std::size_t> st(rank, 0);
        std::size_t acc = 1;
        for (std::size_t i = s.size(); i-- > 0;) {
            std::size_t out_i = i + (rank - s.size());
            st[out_i] = (s[i] == 1 && plan.out[out_i] != 1) ? 0 : acc;
            acc *= s[i];
        }
        return st;
    };
    plan.stride_a = strides_for(a);
    plan.stride_b = strides_for(b);
    return plan;
}

// Odometer walk over the broadcast output; fn(off_a, off_b, off_out).
template <class F>
void for_each_bcast(const BcastPlan& plan, F&& fn) {
    std::size_t total = shape_numel(plan.out);
    if (plan.same_shape) {
        for (std::size_t i = 0; i < total; ++i) fn(i, i, i);
        return;
    }
    std::size_t rank = plan.out.size();
    std::vector<std::size_t> idx(rank, 0);
    std::size_t off_a = 0, off_b = 0;
    for (std::size_t i = 0; i < total; ++i) {
        fn(off_a, off_b, i);
        for (std::size_t d = rank; d-- > 0;) {
            idx[d]++;
            off_a += plan.stride_a[d];
            off_b += plan.stride_b[d];
            if (idx[d] < plan.out[d]) break;
            off_a -= plan.stride_a[d] * plan.out[d];
            off_b -= plan.stride_b[d] * plan.out[d];
            idx[d] = 0;
        }
    }
}

// Shared skeleton for broadcasting binaries. dfa/dfb map (a, b, upstream)
// to the local gradient contribution.
template <class Fwd, class Dfa, class Dfb>
Tensor binary_op(const Tensor& a, const Tensor& b, const char* name, Fwd fwd, Dfa dfa, Dfb dfb) {
    BcastPlan plan = make_bcast(a.shape(), b.shape(), name);
    std::vector<double> out(shape_numel(plan.out));
    const auto& av = a.values();
    const auto& bv = b.values();
    for_each_bcast(plan, [&](std::size_t ia, std::size_t ib, std::size_t io) {
        out[io] = fwd(av[ia], bv[ib]);
    });
    auto pa = a.impl();
    auto pb = b.impl();
    return make_result(plan.out, std::move(out), {a, b}, [plan, pa, pb, dfa, dfb](TensorImpl& o) {
        bool wa = needs(pa), wb = needs(pb);
        if (wa) detail::ensure_grad(*pa);
        if (wb) detail::ensure_grad(*pb);
        for_each_bcast(plan, [&](std::size_t ia, std::size_t ib, std::size_t io) {
            double go = o.grad[io];
            if (wa) pa->grad[ia] += dfa(pa->data[ia], pb->data[ib], go);
            if (wb) pb->grad[ib] += dfb(pa->data[ia], pb->data[ib], go);
        });
    });
}

template <class Fwd, class Dfx>
Tensor unary_op(const Tensor& a, Fwd fwd, Dfx dfx) {
    std::vector<double> out(a.size());
    const auto& av = a.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
    auto pa = a.impl();
    return make_result(a.shape(), std::move(out), {a}, [pa, dfx](TensorImpl& o) {
        if (!needs(pa)) return;
        detail::ensure_grad(*pa);
        for (std::size_t i = 0; i < o.data.size(); ++i)
            pa->grad[i] += dfx(pa->data[i], o.data[i], o.grad[i]);
    });
}

}  // namespace

// --- primitives ----------------------------------------------------------

namespace {

// C += A * B with rows of A processed in blocks, so B is swept once per
// block instead of once per row.
void gemm_acc(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
              std::size_t n) {
    constexpr std::size_t kBlock = 8;
    for (std::size_t i0 = 0; i0 < m; i0 += kBlock) {
        std::size_t ilim = std::min(m, i0 + kBlock);
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double* brow = b + kk * n;
            for (std::size_t i = i0; i < ilim; ++i) {
                double s = a[i * k + kk];
                if (s == 0.0) continue;
                double* crow = c + i * n;
                for (std::size_t j = 0; j < n; ++j) crow[j] += s * brow[j];
            }
        }
    }
}

std::vector<double> transposed(const double* src, std::size_t rows, std::size_t cols) {
    std::vector<double> out(rows * cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = src[i * cols + j];
    return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw ShapeError("matmul: needs rank-2 operands, got " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
    std::size_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
    if (k != k2)
        throw ShapeError("matmul: inner dims differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
    std::vector<double> out(m * n, 0.0);
    gemm_acc(a.values().data(), b.values().data(), out.data(), m, k, n);
    auto pa = a.impl();
    auto pb = b.impl();
    return make_result({m, n}, std::move(out), {a, b}, [pa, pb, m, k, n](TensorImpl& o) {
        const auto& go = o.grad;
        if (needs(pa)) {
            detail::ensure_grad(*pa);
            // dA += dC * B^T
            std::vector<double> bt = transposed(pb->data.data(), k, n);
            gemm_acc(go.data(), bt.data(), pa->grad.data(), m, n, k);
        }
        if (needs(pb)) {
            detail::ensure_grad(*pb);
            // dB += A^T * dC
            std::vector<double> at = transposed(pa->data.data(), m, k);
            gemm_acc(at.data(), go.data(), pb->grad.data(), k, m, n);
        }
    });
}

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "add", [](double x, double y) { return x + y; },
        [](double, double, double g) { return g; }, [](double, double, double g) { return g; });
}

Tensor subtract(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "subtract", [](double x, double y) { return x - y; },
        [](double, double, double g) { return g; }, [](double, double, double g) { return -g; });
}

Tensor multiply(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "multiply", [](double x, double y) { return x * y; },
        [](double, double y, double g) { return g * y; },
        [](double x, double, double g) { return g * x; });
}

Tensor divide(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, "divide", [](double x, double y) { return x / y; },
        [](double, double y, double g) { return g / y; },
        [](double x, double y, double g) { return -g * x / (y * y); });
}

Tensor add_scalar(const Tensor& a, double c) {
    return unary_op(
        a, [c](double x) { return x + c; }, [](double, double, double g) { return g; });
}

Tensor mul_scalar(const Tensor& a, double c) {
    return unary_op(
        a, [c](double x) { return x * c; }, [c](double, double, double g) { return g * c; });
}

Tensor transpose(const Tensor& a) {
    if (a.rank() < 2) throw ShapeError("transpose: needs rank >= 2, got " + shape_str(a.shape()));
    Shape s = a.shape();
    std::size_t r = s.size();
    std::swap(s[r - 1], s[r - 2]);
    std::size_t rows = a.shape()[r - 2], cols = a.shape()[r - 1];
    std::size_t batch = a.size() / (rows * cols);
    std::vector<double> out(a.size());
    const auto& av = a.values();
    for (std::size_t bi = 0; bi < batch; ++bi) {
        const double* src = av.data() + bi * rows * cols;
        double* dst = out.data() + bi * rows * cols;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) dst[j * rows + i] = src[i * cols + j];
    }
    auto pa = a.impl();
    return make_result(std::move(s), std::move(out), {a}, [pa, rows, cols, batch](TensorImpl& o) {
        if (!needs(pa)) return;
        detail::ensure_grad(*pa);
        for (std::size_t bi = 0; bi < batch; ++bi) {
            const double* g = o.grad.data() + bi * rows * cols;
            double* d = pa->grad.data() + bi * rows * cols;
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < cols; ++j) d[i * cols + j] += g[j * rows + i];
        }
    });
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.size())
        throw ShapeError("reshape: cannot view " + shape_str(a.shape()) + " as " +
                         shape_str(shape));
    auto pa = a.impl();
    return make_result(std::move(shape), a.values(), {a}, [pa](TensorImpl& o) {
        if (!needs(pa)) return;
        detail::ensure_grad(*pa);
        for (std::size_t i = 0; i < o.data.size(); ++i) pa->grad[i] += o.grad[i];
    });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
    if (parts.empty()) throw ShapeError("concat: no operands");
    const Shape& s0 = parts[0].shape();
    if (axis >= s0.size()) throw ShapeError("concat: axis out of range");
    Shape out_shape = s0;
    std::size_t axis_total = 0;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        if (s.size() != s0.size()) throw ShapeError("concat: rank mismatch");
        for (std::size_t i = 0; i < s.size(); ++i)
            if (i != axis && s[i] != s0[i])
                throw ShapeError("concat: shape mismatch " + shape_str(s) + " vs " + shape_str(s0));
        axis_total += s[axis];
    }
    out_shape[axis] = axis_total;

    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s0[i];
    for (std::size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];

    std::vector<double> out(shape_numel(out_shape));
    std::size_t out_row = axis_total * inner;
    std::size_t col_off = 0;
    std::vector<std::size_t> offsets(parts.size());
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const auto& pv = parts[pi].values();
        std::size_t chunk = parts[pi].shape()[axis] * inner;
        offsets[pi] = col_off;
        for (std::size_t ou = 0; ou < outer; ++ou)
            std::memcpy(out.data() + ou * out_row + col_off, pv.data() + ou * chunk,
                        chunk * sizeof(double));
        col_off += chunk;
    }

    std::vector<std::shared_ptr<TensorImpl>> impls;
    impls.reserve(parts.size());
    for (const auto& p : parts) impls.push_back(p.impl());
    std::vector<std::size_t> chunks(parts.size());
    for (std::size_t pi = 0; pi < parts.size(); ++pi)
        chunks[pi] = parts[pi].shape()[axis] * inner;

    return make_result(std::move(out_shape), std::move(out), parts,
                       [impls, offsets, chunks, outer, out_row](TensorImpl& o) {
                           for (std::size_t pi = 0; pi < impls.size(); ++pi) {
                               auto& p = impls[pi];
                               if (!needs(p)) continue;
                               detail::ensure_grad(*p);
                               for (std::size_t ou = 0; ou < outer; ++ou) {
                                   const double* g = o.grad.data() + ou * out_row + offsets[pi];
                                   double* d = p->grad.data() + ou * chunks[pi];
                                   for (std::size_t i = 0; i < chunks[pi]; ++i) d[i] += g[i];
                               }
                           }
                       });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t len) {
    const Shape& s = a.shape();
    if (axis >= s.size()) throw ShapeError("slice: axis out of range");
    if (start + len > s[axis])
        throw ShapeError("slice: range [" + std::to_string(start) + "," +
                         std::to_string(start + len) + ") exceeds dim " + std::to_string(s[axis]));
    Shape out_shape = s;
    out_shape[axis] = len;
    std::size_t outer = 1, inner = 1;
    for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
    std::size_t in_row = s[axis] * inner, out_row = len * inner, off = start * inner;

    std::vector<double> out(shape_numel(out_shape));
    const auto& av = a.values();
    for (std::size_t ou = 0; ou < outer; ++ou)
        std::memcpy(out.data() + ou * out_row, av.data() + ou * in_row + off,
                    out_row * sizeof(double));
    auto pa = a.impl();
    return make_result(std::move(out_shape), std::move(out), {a},
                       [pa, outer, in_row, out_row, off](TensorImpl& o) {
                           if (!needs(pa)) return;
                           detail::ensure_grad(*pa);
                           for (std::size_t ou = 0; ou < outer; ++ou) {
                               const double* g = o.grad.data() + ou * out_row;
                               double* d = pa->grad.data() + ou * in_row + off;
                               for (std::size_t i = 0; i < out_row; ++i) d[i] += g[i];
                           }
                       });
}

namespace {

struct AxisDims {
    std::size_t outer, n, inner;
};

AxisDims axis_dims(const Shape& s, std::size_t axis, const char* op) {
    if (axis >= s.size()) throw ShapeError(std::string(op) + ": axis out of range");
    AxisDims d{1, s[axis], 1};
    for (std::size_t i = 0; i < axis; ++i) d.outer *= s[i];
    for (std::size_t i = axis + 1; i < s.size(); ++i) d.inner *= s[i];
    return d;
}

Shape reduced_shape(const Shape& s, std::size_t axis, bool keepdim) {
    Shape out = s;
    if (keepdim) {
        out[axis] = 1;
    } else {
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(axis));
    }
    return out;
}

}  // namespace

Tensor sum(const Tensor& a, std::size_t axis, bool keepdim) {
    AxisDims d = axis_dims(a.shape(), axis, "sum");
    std::vector<double> out(d.outer * d.inner, 0.0);
    const auto& av = a.values();
    for (std::size_t ou = 0; ou < d.outer; ++ou)
        for (std::size_t i = 0; i < d.n; ++i)
            for (std::size_t in = 0; in < d.inner; ++in)
                out[ou * d.inner + in] += av[(ou * d.n + i) * d.inner + in];
    auto pa = a.impl();
    return make_result(reduced_shape(a.shape(), axis, keepdim), std::move(out), {a},
                       [pa, d](TensorImpl& o) {
                           if (!needs(pa)) return;
                           detail::ensure_grad(*pa);
                           for (std::size_t ou = 0; ou < d.outer; ++ou)
                               for (std::size_t i = 0; i < d.n; ++i)
                                   for (std::size_t in = 0; in < d.inner; ++in)
                                       pa->grad[(ou * d.n + i) * d.inner + in] +=
                                           o.grad[ou * d.inner + in];
                       });
}

Tensor mean(const Tensor& a, std::size_t axis, bool keepdim) {
    AxisDims d = axis_dims(a.shape(), axis, "mean");
    if (d.n == 0) throw ShapeError("mean: empty axis");
    std::vector<double> out(d.outer * d.inner, 0.0);
    const auto& av = a.values();
    for (std::size_t ou = 0; ou < d.outer; ++ou)
        for (std::size_t i = 0; i < d.n; ++i)
            for (std::size_t in = 0; in < d.inner; ++in)
                out[ou * d.inner + in] += av[(ou * d.n + i) * d.inner + in];
    for (auto& v : out) v /= static_cast<double>(d.n);
    auto pa = a.impl();
    return make_result(reduced_shape(a.shape(), axis, keepdim), std::move(out), {a},
                       [pa, d](TensorImpl& o) {
                           if (!needs(pa)) return;
                           detail::ensure_grad(*pa);
                           double inv = 1.0 / static_cast<double>(d.n);
                           for (std::size_t ou = 0; ou < d.outer; ++ou)
                               for (std::size_t i = 0; i < d.n; ++i)
                                   for (std::size_t in = 0; in < d.inner; ++in)
                                       pa->grad[(ou * d.n + i) * d.inner + in] +=
                                           o.grad[ou * d.inner + in] * inv;
                       });
}

Tensor variance(const Tensor& a, std::size_t axis, bool keepdim) {
    AxisDims d = axis_dims(a.shape(), axis, "variance");
    if (d.n == 0) throw ShapeError("variance: empty axis");
    const auto& av = a.values();
    std::vector<double> mu(d.outer * d.inner, 0.0);
    std::vector<double> out(d.outer * d.inner, 0.0);
    for (std::size_t ou = 0; ou < d.outer; ++ou)
        for (std::size_t i = 0; i < d.n; ++i)
            for (std::size_t in = 0; in < d.inner; ++in)
                mu[ou * d.inner + in] += av[(ou * d.n + i) * d.inner + in];
    for (auto& v : mu) v /= static_cast<double>(d.n);
    for (std::size_t ou = 0; ou < d.outer; ++ou)
        for (std::size_t i = 0; i < d.n; ++i)
            for (std::size_t in = 0; in < d.inner; ++in) {
                double c = av[(ou * d.n + i) * d.inner + in] - mu[ou * d.inner + in];
                out[ou * d.inner + in] += c * c;
            }
    for (auto& v : out) v /= static_cast<double>(d.n);
    auto pa = a.impl();
    return make_result(reduced_shape(a.shape(), axis, keepdim), std::move(out), {a},
                       [pa, d, mu](TensorImpl& o) {
                           if (!needs(pa)) return;
                           detail::ensure_grad(*pa);
                           double inv = 2.0 / static_cast<double>(d.n);
                           for (std::size_t ou = 0; ou < d.outer; ++ou)
                               for (std::size_t i = 0; i < d.n; ++i)
                                   for (std::size_t in = 0; in < d.inner; ++in) {
                                       std::size_t src = (ou * d.n + i) * d.inner + in;
                                       std::size_t dst = ou * d.inner + in;
                                       pa->grad[src] +=
                                           o.grad[dst] * inv * (pa->data[src] - mu[dst]);
                                   }
                       });
}

Tensor sum_all(const Tensor& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    auto pa = a.impl();
    return make_result({}, {acc}, {a}, [pa](TensorImpl& o) {
        if (!needs(pa)) return;
        detail::ensure_grad(*pa);
        for (auto& g : pa->grad) g += o.grad[0];
    });
}

Tensor mean_all(const Tensor& a) {
    if (a.size() == 0) throw ShapeError("mean_all: empty tensor");
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    acc /= static_cast<double>(a.size());
    auto pa = a.impl();
    double inv = 1.0 / static_cast<double>(a.size());
    return make_result({}, {acc}, {a}, [pa, inv](TensorImpl& o) {
        if (!needs(pa)) return;
        detail::ensure_grad(*pa);
        for (auto& g : pa->grad) g += o.grad[0] * inv;
    });
}

Tensor softmax(const Tensor& a) {
    if (a.rank() == 0) throw ShapeError("softmax: needs rank >= 1");
    std::size_t n = a.shape().back();
    std::size_t rows = a.size() / n;
    std::vector<double> out(a.size());
    const auto& av = a.values();
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = av.data() + r * n;
        double* y = out.data() + r * n;
        double mx = x[0];
        for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, x[i]);
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = std::exp(x[i] - mx);
            z += y[i];
        }
        for (std::size_t i = 0; i < n; ++i) y[i] /= z;
    }
    auto pa = a.impl();
    return make_result(a.shape(), std::move(out), {a}, [pa, rows, n](TensorImpl& o) {
        if (!needs(pa)) return;
        detail::ensure_grad(*pa);
        for (std::size_t r = 0; r < rows; ++r) {
            const double* y = o.data.data() + r * n;
            const double* g = o.grad.data() + r * n;
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += y[i] * g[i];
            double* d = pa->grad.data() + r * n;
            for (std::size_t i = 0; i < n; ++i) d[i] += y[i] * (g[i] - dot);
        }
    });
}

Tensor softplus(const Tensor& a) {
    return unary_op(
        a,
        [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
        [](double x, double, double g) { return g / (1.0 + std::exp(-x)); });
}

Tensor log(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::log(x); },
        [](double x, double, double g) { return g / x; });
}

Tensor exp(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::exp(x); },
        [](double, double y, double g) { return g * y; });
}

Tensor sqrt(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::sqrt(x); },
        [](double, double y, double g) { return 0.5 * g / y; });
}

Tensor gelu(const Tensor& a) {
    constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
    constexpr double kA = 0.044715;
    return unary_op(
        a,
        [](double x) {
            double u = kC * (x + kA * x * x * x);
            return 0.5 * x * (1.0 + std::tanh(u));
        },
        [](double x, double, double g) {
            double u = kC * (x + kA * x * x * x);
            double t = std::tanh(u);
            double du = kC * (1.0 + 3.0 * kA * x * x);
            return g * (0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du);
        });
}

Tensor clamp_min(const Tensor& a, double floor) {
    return unary_op(
        a, [floor](double x) { return x < floor ? floor : x; },
        [floor](double x, double, double g) { return x < floor ? 0.0 : g; });
}

Tensor avg_pool1d(const Tensor& a, std::size_t k) {
    if (k == 0) throw ShapeError("avg_pool1d: kernel must be positive");
    if (a.rank() == 0) throw ShapeError("avg_pool1d: needs rank >= 1");
    std::size_t n = a.shape().back();
    if (n < k)
        throw ShapeError("avg_pool1d: length " + std::to_string(n) + " shorter than kernel " +
                         std::to_string(k));
    std::size_t m = n / k;  // remainder dropped
    std::size_t rows = a.size() / n;
    Shape out_shape = a.shape();
    out_shape.back() = m;
    std::vector<double> out(rows * m, 0.0);
    const auto& av = a.values();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) acc += av[r * n + j * k + i];
            out[r * m + j] = acc / static_cast<double>(k);
        }
    auto pa = a.impl();
    return make_result(std::move(out_shape), std::move(out), {a}, [pa, rows, n, m, k](TensorImpl& o) {
        if (!needs(pa)) return;
        detail::ensure_grad(*pa);
        double inv = 1.0 / static_cast<double>(k);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t j = 0; j < m; ++j) {
                double g = o.grad[r * m + j] * inv;
                for (std::size_t i = 0; i < k; ++i) pa->grad[r * n + j * k + i] += g;
            }
    });
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& offset, double eps) {
    if (a.rank() == 0) throw ShapeError("layer_norm: needs rank >= 1");
    std::size_t n = a.shape().back();
    if (gain.size() != n || offset.size() != n)
        throw ShapeError("layer_norm: affine size must match last axis (" + std::to_string(n) +
                         ")");
    std::size_t rows = a.size() / n;
    const auto& av = a.values();
    const auto& gv = gain.values();
    const auto& bv = offset.values();
    std::vector<double> out(a.size());
    std::vector<double> inv_std(rows), mu(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* x = av.data() + r * n;
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += x[i];
        m /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) var += (x[i] - m) * (x[i] - m);
        var /= static_cast<double>(n);
        double is = 1.0 / std::sqrt(var + eps);
        mu[r] = m;
        inv_std[r] = is;
        double* y = out.data() + r * n;
        for (std::size_t i = 0; i < n; ++i) y[i] = (x[i] - m) * is * gv[i] + bv[i];
    }
    auto pa = a.impl();
    auto pg = gain.impl();
    auto pb = offset.impl();
    return make_result(a.shape(), std::move(out), {a, gain, offset},
                       [pa, pg, pb, rows, n, mu, inv_std](TensorImpl& o) {
                           bool wa = needs(pa), wg = needs(pg), wb = needs(pb);
                           if (wa) detail::ensure_grad(*pa);
                           if (wg) detail::ensure_grad(*pg);
                           if (wb) detail::ensure_grad(*pb);
                           for (std::size_t r = 0; r < rows; ++r) {
                               const double* x = pa->data.data() + r * n;
                               const double* g = o.grad.data() + r * n;
                               double is = inv_std[r], m = mu[r];
                               double s1 = 0.0, s2 = 0.0;
                               for (std::size_t i = 0; i < n; ++i) {
                                   double xh = (x[i] - m) * is;
                                   double gg = g[i] * pg->data[i];
                                   s1 += gg;
                                   s2 += gg * xh;
                                   if (wg) pg->grad[i] += g[i] * xh;
                                   if (wb) pb->grad[i] += g[i];
                               }
                               if (!wa) continue;
                               double invn = 1.0 / static_cast<double>(n);
                               for (std::size_t i = 0; i < n; ++i) {
                                   double xh = (x[i] - m) * is;
                                   double gg = g[i] * pg->data[i];
                                   pa->grad[r * n + i] +=
                                       is * (gg - invn * s1 - xh * invn * s2);
                               }
                           }
                       });
}

Tensor gather_last(const Tensor& a, const std::vector<std::vector<std::size_t>>& indices) {
    if (a.rank() == 0) throw ShapeError("gather_last: needs rank >= 1");
    std::size_t n = a.shape().back();
    std::size_t rows = a.size() / n;
    if (indices.size() != rows)
        throw ShapeError("gather_last: expected " + std::to_string(rows) + " index rows, got " +
                         std::to_string(indices.size()));
    std::size_t k = indices.empty() ? 0 : indices[0].size();
    for (const auto& row : indices) {
        if (row.size() != k) throw ShapeError("gather_last: ragged index rows");
        for (std::size_t idx : row)
            if (idx >= n) throw ShapeError("gather_last: index " + std::to_string(idx) +
                                           " out of range " + std::to_string(n));
    }
    Shape out_shape = a.shape();
    out_shape.back() = k;
    std::vector<double> out(rows * k);
    const auto& av = a.values();
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < k; ++j) out[r * k + j] = av[r * n + indices[r][j]];
    auto pa = a.impl();
    return make_result(std::move(out_shape), std::move(out), {a},
                       [pa, indices, rows, n, k](TensorImpl& o) {
                           if (!needs(pa)) return;
                           detail::ensure_grad(*pa);
                           for (std::size_t r = 0; r < rows; ++r)
                               for (std::size_t j = 0; j < k; ++j)
                                   pa->grad[r * n + indices[r][j]] += o.grad[r * k + j];
                       });
}

}  // namespace amd
