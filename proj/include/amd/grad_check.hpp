// SPDX-License-Identifier: Apache-2.0
//
// Central-difference gradient verification. The numeric side only ever runs
// forward passes, so it stays independent of every backward rule it checks.
#pragma once

#include <functional>
#include <vector>

#include "amd/tensor.hpp"

namespace amd {

using TensorFn = std::function<Tensor(const std::vector<Tensor>&)>;

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t input_index = 0;  // worst coordinate
    std::size_t coord = 0;
    double analytic = 0.0;
    double numeric = 0.0;
};

// fn must map the given tensors to a finite scalar and be deterministic.
// The tensors are used in place: they are marked as requiring gradients and
// their analytic grads are compared coordinate-by-coordinate against
// (f(x+h) - f(x-h)) / 2h with relative error
//   |analytic - numeric| / max(1, |analytic|, |numeric|).
// A non-finite forward value raises NumericError naming the coordinate.
GradCheckReport grad_check(const TensorFn& fn, const std::vector<Tensor>& inputs,
                           double step = 1e-6);

}  // namespace amd
