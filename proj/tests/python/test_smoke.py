# SPDX-License-Identifier: Apache-2.0
"""Smoke tests for the amdcore extension module.

Runs standalone (python test_smoke.py, with the module on PYTHONPATH) or
under pytest.
"""
import json
import math
import os
import tempfile

import numpy as np

import amdcore


def test_synthetic_series():
    a = amdcore.synthetic_series("sine", 96, channels=2, period=24)
    assert a.shape == (96, 2)
    assert abs(a[0, 0]) < 1e-12
    assert np.max(np.abs(a)) <= 1.0 + 1e-12
    b = amdcore.synthetic_series("sine", 96, channels=2, period=24)
    assert np.array_equal(a, b)


def test_topk_scale_values():
    out = amdcore.topk_scale(np.array([0.5, 0.3, 0.2]), 1, 1.0)
    assert abs(out[0] - (math.exp(0.5) - 1.0)) < 1e-12
    assert abs(out[1] - math.log(1.3)) < 1e-12
    assert abs(out[2] - math.log(1.2)) < 1e-12


def test_selector_balance():
    uniform = np.full((6, 8), 1.0 / 8.0)
    assert amdcore.selector_balance(uniform) < 1e-12
    onehot = np.zeros((5, 8))
    onehot[:, 0] = 1.0
    assert abs(amdcore.selector_balance(onehot) - 7.0) < 1e-6


def test_metrics():
    m = amdcore.metrics(np.array([3.0, -4.0]), np.array([0.0, 0.0]))
    assert abs(m["mse"] - 12.5) < 1e-12
    assert abs(m["mae"] - 3.5) < 1e-12


def test_d_model_rule():
    assert amdcore.compute_d_model(7) == 32
    assert amdcore.compute_d_model(321) == 256


def test_theorem_bound_check():
    report = amdcore.theorem_bound_check(period=24, length=96, horizon=48,
                                         trials=20, seed=7, threads=2)
    assert report["passed"]
    assert report["num_violations"] == 0
    assert report["checks"] == 20 * 48


def _toy_config(epochs=4):
    return json.dumps({
        "data": {"split": {"mode": "ratio", "train": 0.7, "val": 0.1, "test": 0.2}},
        "model": {
            "lookback": 32, "horizon": 8,
            "mdm": {"num_scales": 3, "rate": 2},
            "ddi": {"patch_len": 8, "channel_mix_scale": 0.5},
            "ams": {"num_predictors": 4, "top_k": 2, "alpha": 1.0,
                    "hidden": 64, "selector_hidden": 32},
            "train": {"batch_size": 32, "epochs": epochs,
                      "learning_rate": 2e-3, "seed": 11},
        },
    })


def test_train_evaluate_predict_roundtrip():
    values = amdcore.synthetic_series("multi-scale-mix", 400, channels=2,
                                      period=8, noise=0.05, seed=3)
    with tempfile.TemporaryDirectory() as tmp:
        ckpt = os.path.join(tmp, "toy.ckpt")
        report = amdcore.train_forecaster(_toy_config(), values, ckpt)
        assert report["epochs"] == 4
        assert report["train_loss"][-1] < report["train_loss"][0]
        assert report["checkpoint"] == ckpt

        scored = amdcore.evaluate_checkpoint(ckpt, values)
        assert math.isfinite(scored["mse"]) and scored["mse"] > 0
        assert abs(scored["mse"] - report["test_mse"]) < 1e-9

        fc = amdcore.predict_next(ckpt, values)
        assert fc.shape == (8, 2)
        assert np.all(np.isfinite(fc))

        gates = amdcore.gate_trace(ckpt, values[:120])
        assert gates.shape[1:] == (2, 4)
        sums = gates.sum(axis=2)
        assert np.max(np.abs(sums - 1.0)) < 1e-8


def test_determinism_across_runs():
    values = amdcore.synthetic_series("sine", 200, channels=2, period=12,
                                      noise=0.02, seed=9)
    r1 = amdcore.train_forecaster(_toy_config(epochs=2), values)
    r2 = amdcore.train_forecaster(_toy_config(epochs=2), values)
    assert r1["train_loss"] == r2["train_loss"]
    assert r1["val_mse"] == r2["val_mse"]


def test_presets_exposed():
    names = amdcore.preset_names()
    assert "etth1" in names and "weather" in names


def test_errors_translate():
    try:
        amdcore.synthetic_series("square-wave", 10)
    except ValueError as e:
        assert "unknown kind" in str(e)
    else:
        raise AssertionError("expected ValueError")


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"PASS {name}")
            except Exception as exc:  # noqa: BLE001
                failures += 1
                print(f"FAIL {name}: {exc}")
    raise SystemExit(1 if failures else 0)
