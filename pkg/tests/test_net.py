from __future__ import annotations

import math

import numpy as np
import pytest

from testprio.errors import (
    CorruptModel,
    DimMismatch,
    LengthMismatch,
    NonFiniteLoss,
    SchemaVersionMismatch,
)
from testprio.features import FeatureBounds
from testprio.net import (
    AdamState,
    Network,
    SavedModel,
    TrainConfig,
    adam_step,
    backward,
    forward,
    load_model,
    mish,
    mish_prime,
    mse,
    predict,
    save_model,
    train,
    xavier_init,
)

from datetime import datetime


class TestMish:
    def test_zero(self):
        assert mish(0.0) == 0.0

    def test_one(self):
        assert float(mish(1.0)) == pytest.approx(0.8650983882673103, abs=1e-12)

    def test_large_negative_asymptote(self):
        assert abs(float(mish(-20.0))) < 1e-7

    def test_lower_bound_and_identity_asymptote(self):
        grid = np.linspace(-60.0, 60.0, 20001)
        values = mish(grid)
        assert np.all(values > -0.31)
        assert np.all(np.isfinite(values))
        assert float(mish(30.0)) / 30.0 == pytest.approx(1.0, abs=1e-9)

    def test_derivative_matches_finite_differences(self):
        grid = np.linspace(-8.0, 8.0, 401)
        h = 1e-6
        numeric = (mish(grid + h) - mish(grid - h)) / (2 * h)
        assert np.allclose(mish_prime(grid), numeric, atol=1e-7)


class TestXavierInit:
    def test_bound_for_14_by_10(self):
        net = xavier_init((14, 10), np.random.default_rng(0))
        limit = math.sqrt(6 / 24)
        assert limit == 0.5
        assert np.all(np.abs(net.weights[0]) < limit)

    def test_biases_zero(self):
        net = xavier_init((14, 10, 20, 15, 1), np.random.default_rng(0))
        assert all(np.all(b == 0.0) for b in net.biases)

    def test_deterministic(self):
        a = xavier_init((5, 3, 1), np.random.default_rng(9))
        b = xavier_init((5, 3, 1), np.random.default_rng(9))
        assert all(np.array_equal(x, y) for x, y in zip(a.weights, b.weights))

    def test_parameter_count(self):
        net = xavier_init((14, 10, 20, 15, 1), np.random.default_rng(0))
        assert net.parameter_count == 701


def reference_forward(net: Network, x):
    """Plain-loop re-implementation of the layer chain."""
    a = [float(v) for v in x]
    n_layers = len(net.weights)
    for layer, (w, b) in enumerate(zip(net.weights, net.biases)):
        out = []
        for j in range(w.shape[1]):
            z = b[j]
            for i in range(w.shape[0]):
                z += a[i] * w[i, j]
            if layer < n_layers - 1:
                z = z * math.tanh(math.log1p(math.exp(-abs(z))) + max(z, 0.0))
            out.append(z)
        a = out
    return a[0]


class TestForward:
    def test_zero_network_outputs_zero(self):
        net = Network((3, 2, 1), [np.zeros((3, 2)), np.zeros((2, 1))],
                      [np.zeros(2), np.zeros(1)])
        preds, _ = forward(net, np.ones((4, 3)))
        assert np.all(preds == 0.0)

    def test_one_by_one_identity(self):
        net = Network((1, 1), [np.ones((1, 1))], [np.zeros(1)])
        for value in (-2.0, 0.0, 0.7, 3.5):
            assert predict(net, np.array([value])) == pytest.approx(value)

    def test_matches_reference_evaluator(self):
        rng = np.random.default_rng(33)
        for _ in range(20):
            dims = (int(rng.integers(1, 8)), int(rng.integers(1, 8)),
                    int(rng.integers(1, 8)), 1)
            net = xavier_init(dims, rng)
            x = rng.normal(size=dims[0])
            assert predict(net, x) == pytest.approx(reference_forward(net, x), rel=1e-12)

    def test_dim_mismatch(self):
        net = xavier_init((4, 2, 1), np.random.default_rng(0))
        with pytest.raises(DimMismatch):
            forward(net, np.ones((3, 5)))


class TestMse:
    def test_identical(self):
        assert mse([0.3, 0.4], [0.3, 0.4]) == 0.0

    def test_unit_error(self):
        assert mse([0.0], [1.0]) == 1.0

    def test_half(self):
        assert mse([0.0, 1.0], [1.0, 1.0]) == pytest.approx(0.5)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            mse([0.0], [1.0, 2.0])


def finite_difference_grads(net, X, y, h=1e-5):
    grads_w = [np.zeros_like(w) for w in net.weights]
    grads_b = [np.zeros_like(b) for b in net.biases]
    def loss():
        return mse(forward(net, X)[0], y)
    for w, g in zip(net.weights, grads_w):
        it = np.nditer(w, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = w[idx]
            w[idx] = orig + h
            hi = loss()
            w[idx] = orig - h
            lo = loss()
            w[idx] = orig
            g[idx] = (hi - lo) / (2 * h)
    for b, g in zip(net.biases, grads_b):
        for idx in range(b.size):
            orig = b[idx]
            b[idx] = orig + h
            hi = loss()
            b[idx] = orig - h
            lo = loss()
            b[idx] = orig
            g[idx] = (hi - lo) / (2 * h)
    return grads_w, grads_b


def max_rel_err(analytic, numeric):
    worst = 0.0
    for a, n in zip(analytic, numeric):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-6)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


class TestBackward:
    def test_zero_residual_zero_gradients(self):
        net = Network((2, 2, 1), [np.zeros((2, 2)), np.zeros((2, 1))],
                      [np.zeros(2), np.zeros(1)])
        _, cache = forward(net, np.ones((3, 2)))
        grads_w, grads_b = backward(net, cache, np.zeros(3))
        assert all(np.all(g == 0.0) for g in grads_w + grads_b)

    def test_output_bias_gradient_is_twice_mean_residual(self):
        rng = np.random.default_rng(44)
        net = xavier_init((5, 4, 1), rng)
        X = rng.normal(size=(8, 5))
        y = rng.uniform(size=8)
        preds, cache = forward(net, X)
        _, grads_b = backward(net, cache, y)
        assert grads_b[-1][0] == pytest.approx(2.0 * float(np.mean(preds - y)), rel=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(45)
        for _ in range(10):
            depth = int(rng.integers(1, 4))
            dims = (int(rng.integers(1, 6)),
                    *(int(rng.integers(1, 7)) for _ in range(depth)), 1)
            net = xavier_init(dims, rng)
            X = rng.normal(size=(int(rng.integers(1, 6)), dims[0]))
            y = rng.uniform(size=X.shape[0])
            _, cache = forward(net, X)
            analytic = backward(net, cache, y)
            numeric = finite_difference_grads(net, X, y)
            assert max_rel_err(analytic[0] + analytic[1],
                               numeric[0] + numeric[1]) <= 1e-4


class TestAdam:
    def test_zero_gradient_no_change(self):
        net = xavier_init((3, 2, 1), np.random.default_rng(0))
        before = [w.copy() for w in net.weights]
        grads = ([np.zeros_like(w) for w in net.weights],
                 [np.zeros_like(b) for b in net.biases])
        adam_step(net, grads, AdamState.zeros(net), TrainConfig())
        assert all(np.array_equal(a, b) for a, b in zip(before, net.weights))

    def test_first_step_closed_form(self):
        """Step 1 moves each parameter by lr * g / (|g| + eps)."""
        net = Network((1, 1), [np.array([[0.5]])], [np.array([0.2])])
        g = 0.37
        cfg = TrainConfig()
        grads = ([np.array([[g]])], [np.array([0.0])])
        adam_step(net, grads, AdamState.zeros(net), cfg)
        expected = 0.5 - cfg.learning_rate * g / (abs(g) + cfg.adam_eps)
        assert net.weights[0][0, 0] == pytest.approx(expected, rel=1e-12)

    def test_training_deterministic(self):
        rng = np.random.default_rng(7)
        X = rng.uniform(-1, 1, (30, 4))
        y = rng.uniform(size=30)
        runs = []
        for _ in range(2):
            net = xavier_init((4, 5, 1), np.random.default_rng(3))
            result = train(net, X, y, TrainConfig(epochs_max=40, rng_seed=5))
            runs.append(result)
        assert runs[0].epoch_mse == runs[1].epoch_mse
        assert all(np.array_equal(a, b) for a, b in
                   zip(runs[0].net.weights, runs[1].net.weights))


class TestTrain:
    def test_single_point_memorization(self):
        net = xavier_init((14, 10, 20, 15, 1), np.random.default_rng(0))
        X = np.random.default_rng(1).uniform(-1, 1, (1, 14))
        result = train(net, X, np.array([0.7]), TrainConfig(mse_stop=1e-6))
        assert result.stopped_epoch <= 1000
        assert result.final_mse < 1e-6

    def test_losses_always_finite_and_improving(self):
        rng = np.random.default_rng(2)
        X = rng.uniform(-1, 1, (50, 6))
        y = rng.uniform(size=50)
        net = xavier_init((6, 8, 1), rng)
        result = train(net, X, y, TrainConfig(epochs_max=200))
        assert all(math.isfinite(m) for m in result.epoch_mse)
        assert min(result.epoch_mse) <= result.epoch_mse[0]

    def test_label_range_enforced(self):
        net = xavier_init((2, 1), np.random.default_rng(0))
        with pytest.raises(ValueError):
            train(net, np.ones((2, 2)), np.array([0.5, 1.5]), TrainConfig())

    def test_non_finite_loss_aborts(self):
        net = xavier_init((2, 2, 1), np.random.default_rng(0))
        net.weights[0][0, 0] = np.nan
        with pytest.raises(NonFiniteLoss):
            train(net, np.ones((2, 2)), np.array([0.5, 0.5]), TrainConfig())

    def test_mini_batch_mode(self):
        rng = np.random.default_rng(3)
        X = rng.uniform(-1, 1, (64, 4))
        y = rng.uniform(size=64)
        net = xavier_init((4, 6, 1), rng)
        result = train(net, X, y, TrainConfig(epochs_max=50, batch_size=16))
        assert len(result.epoch_mse) <= 50


BOUNDS = FeatureBounds(0.5, 12.0, datetime(2016, 1, 1), datetime(2016, 6, 1))


class TestSerialization:
    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(8)
        net = xavier_init((14, 10, 20, 15, 1), rng)
        train(net, rng.uniform(-1, 1, (20, 14)), rng.uniform(size=20),
              TrainConfig(epochs_max=30))
        model = SavedModel(net, BOUNDS, weight_scheme="linear", rng_seed=8)
        path = tmp_path / "model.txt"
        save_model(model, path)
        loaded = load_model(path)
        X = rng.uniform(-3, 3, (100, 14))
        assert np.array_equal(predict(net, X), predict(loaded.net, X))
        assert loaded.bounds == BOUNDS
        assert loaded.weight_scheme == "linear"
        assert loaded.rng_seed == 8

    def test_none_bounds_round_trip(self, tmp_path):
        net = xavier_init((14, 10, 1), np.random.default_rng(0))
        model = SavedModel(net, FeatureBounds(0.0, 0.0, None, None))
        save_model(model, tmp_path / "m.txt")
        loaded = load_model(tmp_path / "m.txt")
        assert loaded.bounds.lastrun_earliest is None

    def test_truncated_file(self, tmp_path):
        net = xavier_init((4, 3, 1), np.random.default_rng(0))
        path = tmp_path / "model.txt"
        save_model(SavedModel(net, BOUNDS), path)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-3]))
        with pytest.raises(CorruptModel):
            load_model(path)

    def test_version_mismatch(self, tmp_path):
        net = xavier_init((4, 3, 1), np.random.default_rng(0))
        path = tmp_path / "model.txt"
        save_model(SavedModel(net, BOUNDS), path)
        text = path.read_text().replace("tpmodel 1", "tpmodel 2", 1)
        path.write_text(text)
        with pytest.raises(SchemaVersionMismatch):
            load_model(path)

    def test_not_a_model(self, tmp_path):
        path = tmp_path / "model.txt"
        path.write_text("hello world\n")
        with pytest.raises(CorruptModel):
            load_model(path)

    def test_window_len_property(self):
        net = xavier_init((14, 10, 1), np.random.default_rng(0))
        assert SavedModel(net, BOUNDS).window_len == 10
