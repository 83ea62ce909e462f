// SPDX-License-Identifier: Apache-2.0
#include "amd/grad_check.hpp"

#include <cmath>
#include <string>

namespace amd {

GradCheckReport grad_check(const TensorFn& fn, const std::vector<Tensor>& inputs, double step) {
    if (step <= 0.0) throw NumericError("grad_check: step must be positive");

    std::vector<Tensor> args = inputs;
    for (auto& t : args) {
        t.set_requires_grad(true);
        t.zero_grad();
    }

    Tensor out = fn(args);
    if (out.size() != 1) throw ShapeError("grad_check: fn must return a scalar");
    if (!std::isfinite(out.value()))
        throw NumericError("grad_check: non-finite forward value at base point");
    out.backward();

    std::vector<std::vector<double>> analytic(args.size());
    for (std::size_t i = 0; i < args.size(); ++i)
        analytic[i] = args[i].has_grad() ? args[i].grad() : std::vector<double>(args[i].size(), 0.0);

    GradCheckReport report;
    NoGradGuard no_grad;
    for (std::size_t i = 0; i < args.size(); ++i) {
        auto& data = args[i].raw_data();
        for (std::size_t j = 0; j < data.size(); ++j) {
            double saved = data[j];
            data[j] = saved + step;
            double fp = fn(args).value();
            data[j] = saved - step;
            double fm = fn(args).value();
            data[j] = saved;
            if (!std::isfinite(fp) || !std::isfinite(fm))
                throw NumericError("grad_check: non-finite value probing input " +
                                   std::to_string(i) + " coord " + std::to_string(j));
            double numeric = (fp - fm) / (2.0 * step);
            double a = analytic[i][j];
            double rel = std::abs(a - numeric) /
                         std::max({1.0, std::abs(a), std::abs(numeric)});
            if (rel > report.max_rel_err) {
                report.max_rel_err = rel;
                report.input_index = i;
                report.coord = j;
                report.analytic = a;
                report.numeric = numeric;
            }
        }
    }
    return report;
}

}  // namespace amd
