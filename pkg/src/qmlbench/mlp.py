"""Multi-layer perceptron baseline: ReLU hidden layers, sigmoid output, BCE loss."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError, ParameterError, TrainingError


@dataclass(frozen=True, eq=False)
class MlpModel:
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        ws = tuple(np.asarray(w, dtype=float) for w in self.weights)
        bs = tuple(np.asarray(b, dtype=float).ravel() for b in self.biases)
        if not ws or len(ws) != len(bs):
            raise DimensionError("need one bias vector per weight matrix")
        for k, (w, b) in enumerate(zip(ws, bs)):
            if w.ndim != 2 or w.shape[1] != b.size:
                raise DimensionError(f"layer {k}: weight {w.shape} vs bias {b.shape}")
            if k and ws[k - 1].shape[1] != w.shape[0]:
                raise DimensionError(f"layer {k}: input size {w.shape[0]} != previous output {ws[k - 1].shape[1]}")
        if ws[-1].shape[1] != 1:
            raise DimensionError("output layer must have size 1")
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    kind = "mlp"

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(_logits(self, _as_rows(self, X))[0])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(int)

    def to_dict(self) -> dict:
        return {"kind": "mlp", "weights": [w.tolist() for w in self.weights],
                "biases": [b.tolist() for b in self.biases]}

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        return cls(tuple(np.asarray(w) for w in d["weights"]), tuple(np.asarray(b) for b in d["biases"]))


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _as_rows(model: MlpModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.weights[0].shape[0]:
        raise DimensionError(f"model expects {model.weights[0].shape[0]} inputs, got {X.shape[1]}")
    return X


def _logits(model: MlpModel, X):
    """Output logits plus the per-layer activations needed for backprop."""
    acts = [X]
    pre = []
    h = X
    last = len(model.weights) - 1
    for k, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if k == last else np.maximum(z, 0.0)
        acts.append(h)
    return h[:, 0], acts, pre


def _bce_from_logits(z, y) -> float:
    # softplus(z) - y*z, computed stably
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def init_mlp(layer_sizes, seed: int) -> MlpModel:
    """He-normal weights, zero biases."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or sizes[-1] != 1 or min(sizes) < 1:
        raise ParameterError(f"layer sizes must run from input to a single output, got {sizes}")
    rng = np.random.default_rng(seed)
    ws = tuple(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out))
               for fan_in, fan_out in zip(sizes[:-1], sizes[1:]))
    bs = tuple(np.zeros(fan_out) for fan_out in sizes[1:])
    return MlpModel(ws, bs)


def mlp_forward(model: MlpModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.weights[0].shape[0],):
        raise DimensionError(f"model expects {model.weights[0].shape[0]} inputs, got shape {x.shape}")
    return float(model.predict_proba(x[None, :])[0])


def _backward(model: MlpModel, X, y):
    z, acts, pre = _logits(model, X)
    m = X.shape[0]
    delta = ((_sigmoid(z) - y) / m)[:, None]
    gw = [None] * len(model.weights)
    gb = [None] * len(model.weights)
    for k in range(len(model.weights) - 1, -1, -1):
        gw[k] = acts[k].T @ delta
        gb[k] = delta.sum(axis=0)
        delta = delta @ model.weights[k].T
        if k:
            delta = delta * (pre[k - 1] > 0)
    return _bce_from_logits(z, y), gw, gb, delta


def mlp_loss_and_grads(model: MlpModel, X, y):
    """Mean BCE and its gradients w.r.t. every weight matrix and bias."""
    X = _as_rows(model, X)
    y = np.asarray(y, dtype=float).ravel()
    loss, gw, gb, _ = _backward(model, X, y)
    return loss, gw, gb


def mlp_loss(model: MlpModel, X, y) -> float:
    X = _as_rows(model, X)
    return _bce_from_logits(_logits(model, X)[0], np.asarray(y, dtype=float).ravel())


def mlp_input_gradient(model: MlpModel, x, y) -> np.ndarray:
    """d(BCE)/dx for one sample with label ``y`` in {0,1}."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.weights[0].shape[0],):
        raise DimensionError(f"model expects {model.weights[0].shape[0]} inputs, got shape {x.shape}")
    _, _, _, dx = _backward(model, x[None, :], np.array([float(y)]))
    return dx[0]


def mlp_train(X, y, layer_sizes=None, lr: float = 0.05, epochs: int = 200, batch: int | None = None,
              seed: int = 0, hidden=(64,)):
    """Mini-batch gradient descent on BCE. Returns ``(model, loss trace)``.

    ``batch=None`` trains full-batch. The trace starts with the initial loss and
    gets one entry per epoch, measured on the whole training set.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] != y.size or y.size == 0:
        raise DataError(f"{X.shape[0]} rows but {y.size} labels")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be 0/1")
    if y.min() == y.max():
        raise DataError("training data contains a single class")
    if not lr > 0:
        raise ParameterError(f"lr must be > 0, got {lr}")
    if epochs < 0:
        raise ParameterError(f"epochs must be >= 0, got {epochs}")
    if layer_sizes is None:
        layer_sizes = [X.shape[1], *hidden, 1]
    if layer_sizes[0] != X.shape[1]:
        raise DimensionError(f"input layer size {layer_sizes[0]} != {X.shape[1]} features")
    model = init_mlp(layer_sizes, seed)
    ws = [w.copy() for w in model.weights]
    bs = [b.copy() for b in model.biases]
    m = y.size
    bsize = m if batch is None or batch >= m else int(batch)
    if bsize < 1:
        raise ParameterError(f"batch must be >= 1, got {batch}")
    rng = np.random.default_rng([seed, 1])
    trace = [mlp_loss(model, X, y)]
    for epoch in range(1, epochs + 1):
        order = np.arange(m) if bsize == m else rng.permutation(m)
        for start in range(0, m, bsize):
            idx = order[start:start + bsize]
            current = MlpModel(tuple(ws), tuple(bs))
            _, gw, gb, _ = _backward(current, X[idx], y[idx])
            for k in range(len(ws)):
                ws[k] = ws[k] - lr * gw[k]
                bs[k] = bs[k] - lr * gb[k]
        loss = mlp_loss(MlpModel(tuple(ws), tuple(bs)), X, y)
        if not np.isfinite(loss):
            raise TrainingError(f"loss became non-finite at epoch {epoch}")
        trace.append(loss)
    return MlpModel(tuple(ws), tuple(bs)), trace
