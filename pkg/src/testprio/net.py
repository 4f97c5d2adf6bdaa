"""Small fully-connected regression network, implemented directly on numpy.

Hidden layers use the Mish activation x * tanh(softplus(x)); the single
output is linear. Training is full-batch gradient descent with the Adam
update and mean-squared-error loss, stopping early once the loss drops
below a configurable floor. Models serialize to a versioned plain-text
format that round-trips bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    CorruptModel,
    DimMismatch,
    LengthMismatch,
    NonFiniteLoss,
    SchemaVersionMismatch,
)
from .features import FeatureBounds

MODEL_MAGIC = "tpmodel"
MODEL_VERSION = "1"


# --- activation -----------------------------------------------------------

def mish(x):
    """x * tanh(softplus(x)), stable for large |x| via logaddexp."""
    x = np.asarray(x, dtype=np.float64)
    return x * np.tanh(np.logaddexp(0.0, x))


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def mish_prime(x):
    """Analytic derivative: tanh(sp(x)) + x * sech^2(sp(x)) * sigmoid(x)."""
    x = np.asarray(x, dtype=np.float64)
    t = np.tanh(np.logaddexp(0.0, x))
    return t + x * (1.0 - t * t) * _sigmoid(x)


# --- network --------------------------------------------------------------

DEFAULT_HIDDEN = (10, 20, 15)


@dataclass
class Network:
    dims: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        if len(self.dims) < 2:
            raise ValueError("need at least an input and an output layer")
        expect = list(zip(self.dims[:-1], self.dims[1:]))
        if len(self.weights) != len(expect) or len(self.biases) != len(expect):
            raise ValueError("parameter list length does not match dims")
        for w, b, (din, dout) in zip(self.weights, self.biases, expect):
            if w.shape != (din, dout) or b.shape != (dout,):
                raise ValueError(f"bad parameter shapes for layer {din}->{dout}")

    @property
    def input_dim(self) -> int:
        return self.dims[0]

    @property
    def parameter_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "Network":
        return Network(self.dims, [w.copy() for w in self.weights],
                       [b.copy() for b in self.biases])


def default_dims(input_dim: int) -> tuple[int, ...]:
    return (input_dim, *DEFAULT_HIDDEN, 1)


def xavier_init(dims: Sequence[int], rng: np.random.Generator) -> Network:
    """Uniform(-L, L) weights with L = sqrt(6 / (fan_in + fan_out)); zero biases."""
    dims = tuple(int(d) for d in dims)
    weights, biases = [], []
    for din, dout in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (din + dout))
        weights.append(rng.uniform(-limit, limit, size=(din, dout)))
        biases.append(np.zeros(dout))
    return Network(dims, weights, biases)


def forward(net: Network, x: np.ndarray) -> tuple[np.ndarray, dict]:
    """Batch forward pass; returns predictions and the cache backward needs."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != net.input_dim:
        raise DimMismatch(x.shape[1], net.input_dim)
    last = len(net.weights) - 1
    activations = [x]
    pre = []
    a = x
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        pre.append(z)
        a = z if i == last else mish(z)
        activations.append(a)
    preds = a[:, 0]
    cache = {"activations": activations, "pre": pre}
    return (preds[0] if squeeze else preds), cache


def predict(net: Network, x: np.ndarray) -> np.ndarray:
    return forward(net, x)[0]


def mse(preds: Sequence[float], labels: Sequence[float]) -> float:
    preds = np.asarray(preds, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if preds.shape != labels.shape:
        raise LengthMismatch(preds.size, labels.size)
    if preds.size == 0:
        raise ValueError("mse of empty sequences is undefined")
    diff = preds - labels
    return float(diff @ diff / diff.size)


def backward(net: Network, cache: dict, labels: np.ndarray
             ) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Gradients of batch-mean squared error w.r.t. every weight and bias."""
    labels = np.asarray(labels, dtype=np.float64)
    activations, pre = cache["activations"], cache["pre"]
    n = activations[0].shape[0]
    preds = activations[-1][:, 0]
    delta = (2.0 / n) * (preds - labels)[:, None]
    grads_w = [None] * len(net.weights)
    grads_b = [None] * len(net.biases)
    for i in reversed(range(len(net.weights))):
        grads_w[i] = activations[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ net.weights[i].T) * mish_prime(pre[i - 1])
    return grads_w, grads_b


# --- optimizer ------------------------------------------------------------

@dataclass
class TrainConfig:
    epochs_max: int = 1000
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    mse_stop: float = 1e-4
    batch_size: int | None = None  # None = full batch
    rng_seed: int = 0

    def __post_init__(self):
        if min(self.epochs_max, self.learning_rate, self.adam_beta1,
               self.adam_beta2, self.adam_eps, self.mse_stop) <= 0:
            raise ValueError("all training hyperparameters must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


@dataclass
class AdamState:
    m_w: list[np.ndarray]
    v_w: list[np.ndarray]
    m_b: list[np.ndarray]
    v_b: list[np.ndarray]
    step: int = 0

    @classmethod
    def zeros(cls, net: Network) -> "AdamState":
        return cls(
            m_w=[np.zeros_like(w) for w in net.weights],
            v_w=[np.zeros_like(w) for w in net.weights],
            m_b=[np.zeros_like(b) for b in net.biases],
            v_b=[np.zeros_like(b) for b in net.biases],
        )


def adam_step(net: Network, grads: tuple[list[np.ndarray], list[np.ndarray]],
              state: AdamState, config: TrainConfig) -> tuple[Network, AdamState]:
    """One bias-corrected Adam update, in place."""
    grads_w, grads_b = grads
    state.step += 1
    t = state.step
    b1, b2, eps, lr = (config.adam_beta1, config.adam_beta2,
                       config.adam_eps, config.learning_rate)
    corr1 = 1.0 - b1 ** t
    corr2 = 1.0 - b2 ** t
    for params, grads_, ms, vs in (
        (net.weights, grads_w, state.m_w, state.v_w),
        (net.biases, grads_b, state.m_b, state.v_b),
    ):
        for p, g, m, v in zip(params, grads_, ms, vs):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            p -= lr * (m / corr1) / (np.sqrt(v / corr2) + eps)
    return net, state


# --- training loop --------------------------------------------------------

@dataclass
class TrainResult:
    net: Network
    epoch_mse: list[float]
    stopped_epoch: int
    reason: str  # "mse_stop" or "epochs_max"

    @property
    def final_mse(self) -> float:
        return self.epoch_mse[-1]


def train(net: Network, X: np.ndarray, y: np.ndarray, config: TrainConfig) -> TrainResult:
    """Train until the full-set MSE drops below ``mse_stop`` or epochs run out.

    The loss is evaluated on the whole training set at the top of every
    epoch, so the recorded ``epoch_mse`` sequence is comparable across
    batch modes. Raises NonFiniteLoss (with diagnostics) the moment the
    loss stops being a number.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training set must be a non-empty 2-d array")
    if y.shape != (X.shape[0],):
        raise LengthMismatch(X.shape[0], y.size)
    if not np.all(np.isfinite(y)) or y.min() < 0 or y.max() > 1:
        raise ValueError("labels must be finite and within [0, 1]")

    rng = np.random.default_rng(config.rng_seed)
    state = AdamState.zeros(net)
    epoch_mse: list[float] = []
    # divergence is detected on the loss and raised; silence the transient
    # overflow chatter that precedes it
    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, config.epochs_max + 1):
            preds, cache = forward(net, X)
            loss = mse(preds, y)
            if not np.isfinite(loss):
                raise NonFiniteLoss(
                    f"epoch {epoch}: loss={loss}; max |param| = "
                    f"{max(float(np.abs(w).max()) for w in net.weights)}"
                )
            epoch_mse.append(loss)
            if loss < config.mse_stop:
                return TrainResult(net, epoch_mse, epoch, "mse_stop")
            if config.batch_size is None:
                adam_step(net, backward(net, cache, y), state, config)
            else:
                order = rng.permutation(X.shape[0])
                for start in range(0, len(order), config.batch_size):
                    idx = order[start : start + config.batch_size]
                    _, bcache = forward(net, X[idx])
                    adam_step(net, backward(net, bcache, y[idx]), state, config)
    return TrainResult(net, epoch_mse, config.epochs_max, "epochs_max")


# --- serialization --------------------------------------------------------

@dataclass
class SavedModel:
    net: Network
    bounds: FeatureBounds
    weight_scheme: str = "linear"
    rng_seed: int | None = None

    @property
    def window_len(self) -> int:
        return self.net.input_dim - 4


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _fmt_ts(ts: datetime | None) -> str:
    return "none" if ts is None else ts.isoformat()  # "T" separator: no spaces


def save_model(model: SavedModel, path: str | Path) -> None:
    """Write the versioned text format; 17 significant digits round-trip
    float64 exactly."""
    net, bounds = model.net, model.bounds
    lines = [
        f"{MODEL_MAGIC} {MODEL_VERSION}",
        f"seed {'none' if model.rng_seed is None else model.rng_seed}",
        f"scheme {model.weight_scheme}",
        "dims " + " ".join(str(d) for d in net.dims),
        f"duration_bounds {_fmt(bounds.duration_min)} {_fmt(bounds.duration_max)}",
        f"lastrun_bounds {_fmt_ts(bounds.lastrun_earliest)} {_fmt_ts(bounds.lastrun_latest)}",
    ]
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        lines.append(f"layer {i} weights {w.shape[0]} {w.shape[1]}")
        lines.extend(" ".join(_fmt(x) for x in row) for row in w)
        lines.append(f"layer {i} biases {b.shape[0]}")
        lines.append(" ".join(_fmt(x) for x in b))
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> SavedModel:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    cursor = 0

    def next_line() -> str:
        nonlocal cursor
        if cursor >= len(lines):
            raise CorruptModel("unexpected end of model file")
        line = lines[cursor]
        cursor += 1
        return line

    head = next_line().split()
    if len(head) != 2 or head[0] != MODEL_MAGIC:
        raise CorruptModel("not a model file")
    if head[1] != MODEL_VERSION:
        raise SchemaVersionMismatch(head[1], MODEL_VERSION)
    try:
        seed_tok = _expect(next_line(), "seed", 1)[0]
        rng_seed = None if seed_tok == "none" else int(seed_tok)
        scheme = _expect(next_line(), "scheme", None)
        dims = tuple(int(d) for d in _expect(next_line(), "dims", None).split())
        dmin, dmax = (float(t) for t in _expect(next_line(), "duration_bounds", 2))
        lr_lo, lr_hi = _expect(next_line(), "lastrun_bounds", 2)
        bounds = FeatureBounds(dmin, dmax, _parse_ts(lr_lo), _parse_ts(lr_hi))
        weights, biases = [], []
        for i, (din, dout) in enumerate(zip(dims[:-1], dims[1:])):
            wdims = _expect(next_line(), f"layer {i} weights", 2)
            if (int(wdims[0]), int(wdims[1])) != (din, dout):
                raise CorruptModel(f"layer {i} weight shape mismatch")
            rows = [_floats(next_line(), dout) for _ in range(din)]
            weights.append(np.array(rows))
            bdims = _expect(next_line(), f"layer {i} biases", 1)
            if int(bdims[0]) != dout:
                raise CorruptModel(f"layer {i} bias shape mismatch")
            biases.append(np.array(_floats(next_line(), dout)))
        if next_line().strip() != "end":
            raise CorruptModel("missing end marker")
    except (ValueError, IndexError) as exc:
        raise CorruptModel(f"malformed model file: {exc}") from None
    return SavedModel(Network(dims, weights, biases), bounds, scheme, rng_seed)


def _expect(line: str, prefix: str, n_tokens: int | None):
    if not line.startswith(prefix + " "):
        raise CorruptModel(f"expected {prefix!r} line, got {line!r}")
    rest = line[len(prefix) + 1 :].strip()
    if n_tokens is None:
        return rest
    tokens = rest.split()
    if len(tokens) != n_tokens:
        raise CorruptModel(f"expected {n_tokens} value(s) after {prefix!r}")
    return tokens


def _floats(line: str, n: int) -> list[float]:
    values = [float(t) for t in line.split()]
    if len(values) != n:
        raise CorruptModel(f"expected {n} numbers per row, got {len(values)}")
    return values


def _parse_ts(token: str) -> datetime | None:
    return None if token == "none" else datetime.fromisoformat(token)
