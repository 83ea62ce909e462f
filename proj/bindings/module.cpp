// SPDX-License-Identifier: Apache-2.0
//
// Python module exposing the main operations: synthetic data, the gating
// primitives, metrics, the error-bound validator, and the train / evaluate /
// predict / gate-trace pipeline working on numpy arrays.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "amd/ams.hpp"
#include "amd/checkpoint.hpp"
#include "amd/config_io.hpp"
#include "amd/grad_check.hpp"
#include "amd/pipeline.hpp"
#include "amd/presets.hpp"
#include "amd/theory.hpp"

namespace py = pybind11;
using namespace amd;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Series series_from_array(const DoubleArray& values) {
    if (values.ndim() != 2) throw DataError("expected a 2-d array (time x channels)");
    Series s;
    s.num_steps = static_cast<std::size_t>(values.shape(0));
    s.channels = static_cast<std::size_t>(values.shape(1));
    s.values.assign(values.data(), values.data() + values.size());
    for (std::size_t c = 0; c < s.channels; ++c)
        s.channel_names.push_back("ch" + std::to_string(c));
    return s;
}

py::array_t<double> array_from_series(const Series& s) {
    py::array_t<double> out({s.num_steps, s.channels});
    std::copy(s.values.begin(), s.values.end(), out.mutable_data());
    return out;
}

py::dict json_to_dict(const nlohmann::json& j) {
    py::object loads = py::module_::import("json").attr("loads");
    return loads(j.dump());
}

py::dict train_forecaster(const std::string& config_json, const DoubleArray& values,
                          const std::string& checkpoint_path, const std::string& preset) {
    nlohmann::json file_json =
        config_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(config_json);
    RunConfig cfg = run_config_from_json(std::move(file_json), preset, nullptr);
    Series series = series_from_array(values);
    TrainedArtifacts art = run_training(cfg, series, nullptr);

    nlohmann::json out{{"epochs", art.report.train_loss.size()},
                       {"train_loss", art.report.train_loss},
                       {"val_mse", art.report.val_mse},
                       {"initial_val_mse", art.report.initial_val_mse},
                       {"best_epoch", art.report.best_epoch},
                       {"best_val_mse", art.report.best_val_mse}};
    if (art.has_test) {
        out["test_mse"] = art.test_metrics.mse;
        out["test_mae"] = art.test_metrics.mae;
    }
    if (!checkpoint_path.empty()) {
        save_checkpoint(art.model, art.meta, checkpoint_path);
        out["checkpoint"] = checkpoint_path;
    }
    return json_to_dict(out);
}

py::dict evaluate_checkpoint(const std::string& path, const DoubleArray& values,
                             std::size_t horizon) {
    LoadedCheckpoint loaded = load_checkpoint(path);
    Metrics m = evaluate_series(loaded.model, loaded.meta, series_from_array(values), horizon);
    py::dict out;
    out["mse"] = m.mse;
    out["mae"] = m.mae;
    out["horizon"] = horizon == 0 ? loaded.model.config().horizon : horizon;
    return out;
}

py::array_t<double> predict_from_checkpoint(const std::string& path, const DoubleArray& values) {
    LoadedCheckpoint loaded = load_checkpoint(path);
    std::vector<double> fc = predict_next(loaded.model, loaded.meta, series_from_array(values));
    const ModelConfig& cfg = loaded.model.config();
    py::array_t<double> out({cfg.horizon, cfg.channels});
    std::copy(fc.begin(), fc.end(), out.mutable_data());
    return out;
}

py::array_t<double> gate_trace_from_checkpoint(const std::string& path,
                                               const DoubleArray& values) {
    LoadedCheckpoint loaded = load_checkpoint(path);
    auto rows = gate_trace(loaded.model, loaded.meta, series_from_array(values));
    const ModelConfig& cfg = loaded.model.config();
    std::size_t windows = rows.size() / cfg.channels;
    py::array_t<double> out({windows, cfg.channels, cfg.ams.num_predictors});
    double* dst = out.mutable_data();
    for (const auto& row : rows)
        for (std::size_t j = 0; j < row.weights.size(); ++j)
            dst[(row.window * cfg.channels + row.channel) * cfg.ams.num_predictors + j] =
                row.weights[j];
    return out;
}

py::array_t<double> topk_scale_py(const DoubleArray& u, std::size_t k, double alpha) {
    if (u.ndim() != 1 && u.ndim() != 2) throw ShapeError("topk_scale: expected 1-d or 2-d input");
    Shape shape;
    for (py::ssize_t d = 0; d < u.ndim(); ++d)
        shape.push_back(static_cast<std::size_t>(u.shape(d)));
    Tensor t = Tensor::from_data(shape, std::vector<double>(u.data(), u.data() + u.size()));
    Tensor out = topk_scale(t, k, alpha);
    py::array_t<double> result(std::vector<py::ssize_t>(u.shape(), u.shape() + u.ndim()));
    std::copy(out.values().begin(), out.values().end(), result.mutable_data());
    return result;
}

double selector_balance_py(const DoubleArray& gates, double eps) {
    if (gates.ndim() != 2) throw ShapeError("selector_balance: expected a 2-d gate matrix");
    Tensor t = Tensor::from_data(
        {static_cast<std::size_t>(gates.shape(0)), static_cast<std::size_t>(gates.shape(1))},
        std::vector<double>(gates.data(), gates.data() + gates.size()));
    return selector_balance_loss(t, eps).value();
}

py::dict metrics_py(const DoubleArray& y_hat, const DoubleArray& y) {
    Metrics m = evaluate_metrics(std::vector<double>(y_hat.data(), y_hat.data() + y_hat.size()),
                                 std::vector<double>(y.data(), y.data() + y.size()));
    py::dict out;
    out["mse"] = m.mse;
    out["mae"] = m.mae;
    return out;
}

py::dict theorem_bound_check_py(std::size_t period, std::size_t length, std::size_t horizon,
                                std::size_t trials, std::uint64_t seed, std::size_t depth,
                                std::size_t rate, const std::string& kind, std::size_t threads) {
    SmoothSeriesSpec spec;
    spec.kind = kind;
    spec.period = period;
    spec.length = length;
    spec.depth = depth;
    spec.rate = rate;
    return json_to_dict(error_bound_check(spec, horizon, trials, seed, threads).to_json());
}

py::array_t<double> synthetic_series(const std::string& kind, std::size_t length,
                                     std::size_t channels, std::size_t period, double amplitude,
                                     double trend, double noise, std::uint64_t seed) {
    return array_from_series(
        gen_synthetic(kind, length, channels, period, amplitude, trend, noise, seed));
}

}  // namespace

PYBIND11_MODULE(amdcore, m) {
    m.doc() = "multi-scale decomposition forecaster";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    m.def("synthetic_series", &synthetic_series, py::arg("kind"), py::arg("length"),
          py::arg("channels") = 1, py::arg("period") = 24, py::arg("amplitude") = 1.0,
          py::arg("trend") = 0.0, py::arg("noise") = 0.0, py::arg("seed") = 1,
          "Deterministic synthetic series as a (length, channels) array");

    m.def("topk_scale", &topk_scale_py, py::arg("u"), py::arg("k"), py::arg("alpha"),
          "Piecewise top-k scaling over the last axis");

    m.def("selector_balance", &selector_balance_py, py::arg("gates"), py::arg("eps") = 1e-10,
          "Coefficient-of-variation load penalty of a (batch, experts) gate matrix");

    m.def("metrics", &metrics_py, py::arg("y_hat"), py::arg("y"),
          "MSE and MAE over all elements");

    m.def("compute_d_model", &compute_d_model, py::arg("channels"),
          "Hidden width rule for the interaction block");

    m.def("theorem_bound_check", &theorem_bound_check_py, py::arg("period") = 24,
          py::arg("length") = 96, py::arg("horizon") = 48, py::arg("trials") = 100,
          py::arg("seed") = 7, py::arg("depth") = 3, py::arg("rate") = 2,
          py::arg("kind") = "sine", py::arg("threads") = 1,
          "Error-bound property sweep; returns the JSON report as a dict");

    m.def("train_forecaster", &train_forecaster, py::arg("config") = "",
          py::arg("values") = DoubleArray(), py::arg("checkpoint_path") = "",
          py::arg("preset") = "",
          "Train on a (time, channels) array; config is run-config JSON text");

    m.def("evaluate_checkpoint", &evaluate_checkpoint, py::arg("path"), py::arg("values"),
          py::arg("horizon") = 0, "Score a checkpoint on the array's test partition");

    m.def("predict_next", &predict_from_checkpoint, py::arg("path"), py::arg("values"),
          "Forecast the horizon following the array's last rows, in original units");

    m.def("gate_trace", &gate_trace_from_checkpoint, py::arg("path"), py::arg("values"),
          "Selector weights as a (windows, channels, experts) array");

    m.def("preset_names", &preset_names, "Names of the built-in per-dataset presets");

    m.attr("__version__") = "1.0.0";
}
