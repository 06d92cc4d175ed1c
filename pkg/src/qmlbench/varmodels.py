"""Variational quantum classifier and QCNN.

Both models read out ``p(y=1|x) = (1 + <Z_readout>) / 2`` from
``ansatz(theta) . feature_map(x) |0...0>`` and are trained on mean binary
cross-entropy.

Gradients use the parameter-shift rule applied to every occurrence of a
parameter and summed, so parameters shared across gates (QCNN) are handled.
Single-qubit Pauli rotations use the two-term rule; CRY has generator
eigenvalues {0, +-1/2} and needs the four-term rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .encoding import FeatureMapSpec, encode_batch
from .errors import DataError, DimensionError, ParameterError, TrainingError
from .simcore import Circuit, Gate, _apply_op, circuit_ops, expectation_z_batch

PROB_CLIP = 1e-12

_SHIFT_TWO = ((np.pi / 2, 0.5), (-np.pi / 2, -0.5))
_C1 = (math.sqrt(2) + 1) / (4 * math.sqrt(2))
_C2 = (math.sqrt(2) - 1) / (4 * math.sqrt(2))
_SHIFT_FOUR = ((np.pi / 2, _C1), (-np.pi / 2, -_C1), (3 * np.pi / 2, -_C2), (-3 * np.pi / 2, _C2))


def ring_pairs(n: int) -> list[tuple[int, int]]:
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    return [(q, (q + 1) % n) for q in range(n)]


def build_ansatz(n_qubits: int, layers: int) -> Circuit:
    """``layers`` x [RY on every qubit, then a CZ ring]. ``layers=0`` is empty."""
    if layers < 0:
        raise ParameterError(f"layers must be >= 0, got {layers}")
    gates = []
    slots = []
    for layer in range(layers):
        for q in range(n_qubits):
            name = f"t{layer * n_qubits + q}"
            slots.append(name)
            gates.append(Gate("RY", (q,), name))
        gates.extend(Gate("CZ", pair) for pair in ring_pairs(n_qubits))
    return Circuit(n_qubits, gates, slots)


@dataclass(frozen=True)
class QcnnSpec:
    n_qubits: int
    conv_params_per_layer: int = 3
    pool_params_per_layer: int = 3

    def __post_init__(self):
        n = self.n_qubits
        if n < 2 or n & (n - 1):
            raise ParameterError(f"QCNN needs a power-of-two qubit count >= 2, got {n}")

    @property
    def layers(self) -> int:
        return self.n_qubits.bit_length() - 1

    @property
    def n_params(self) -> int:
        return self.layers * (self.conv_params_per_layer + self.pool_params_per_layer)


def build_qcnn(spec: QcnnSpec) -> Circuit:
    """Convolution + pooling layers with parameters shared inside each layer.

    Per layer, on disjoint adjacent pairs (first, second) of active qubits:
    conv = RY(a) first, RY(b) second, CZ, RY(c) first; pool = CRY(d) from
    second onto first, then RZ(e), RY(f) on first. Second qubits drop out.
    The last survivor is qubit 0, the readout.
    """
    active = list(range(spec.n_qubits))
    gates = []
    slots = []
    for layer in range(spec.layers):
        a, b, c, d, e, f = (f"l{layer}{s}" for s in "abcdef")
        slots += [a, b, c, d, e, f]
        pairs = list(zip(active[0::2], active[1::2]))
        for first, second in pairs:
            gates += [Gate("RY", (first,), a), Gate("RY", (second,), b),
                      Gate("CZ", (first, second)), Gate("RY", (first,), c)]
        for first, second in pairs:
            gates += [Gate("CRY", (second, first), d), Gate("RZ", (first,), e), Gate("RY", (first,), f)]
        active = active[0::2]
    return Circuit(spec.n_qubits, gates, slots)


@dataclass(frozen=True, eq=False)
class VqcModel:
    theta: np.ndarray
    ansatz: Circuit
    feature_map: FeatureMapSpec
    readout_qubit: int = 0
    kind: str = "vqc"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).ravel()
        object.__setattr__(self, "theta", theta)
        if theta.size != self.ansatz.n_params:
            raise DimensionError(f"theta has {theta.size} entries, ansatz has {self.ansatz.n_params} slots")
        if self.ansatz.n_qubits != self.feature_map.n_qubits:
            raise DimensionError("ansatz and feature map act on different qubit counts")
        if not 0 <= self.readout_qubit < self.ansatz.n_qubits:
            raise DimensionError(f"readout qubit {self.readout_qubit} out of range")

    @property
    def n_qubits(self) -> int:
        return self.ansatz.n_qubits

    @property
    def n_params(self) -> int:
        return self.theta.size

    def with_theta(self, theta) -> "VqcModel":
        return VqcModel(np.asarray(theta, dtype=float), self.ansatz, self.feature_map,
                        self.readout_qubit, self.kind, dict(self.meta))

    def predict_proba(self, X, check: bool = True) -> np.ndarray:
        states = encode_batch(X, self.feature_map, check=check)
        return _probs(_expz(self, states, self.theta))

    def predict(self, X) -> np.ndarray:
        """{0,1} labels; probability exactly 0.5 maps to 1."""
        return (self.predict_proba(X) >= 0.5).astype(int)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "theta": self.theta.tolist(),
            "feature_map": self.feature_map.to_dict(),
            "readout_qubit": self.readout_qubit,
            "ansatz": {"n_qubits": self.ansatz.n_qubits, "param_slots": list(self.ansatz.param_slots),
                       "gates": [[g.kind, list(g.targets), g.angle] for g in self.ansatz.gates]},
        }


def _expz(model: VqcModel, states: np.ndarray, theta) -> np.ndarray:
    amps = states
    n = model.n_qubits
    for kind, targets, angle in circuit_ops(model.ansatz, theta):
        amps = _apply_op(amps, n, kind, targets, angle)
    return expectation_z_batch(amps, n, model.readout_qubit)


def _probs(z: np.ndarray) -> np.ndarray:
    return np.clip((1.0 + z) / 2.0, 0.0, 1.0)


def forward(model: VqcModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.feature_map.n_qubits,):
        raise DimensionError(f"expected {model.feature_map.n_qubits} features, got shape {x.shape}")
    return float(model.predict_proba(x[None, :])[0])


def _check_xy(X, y):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise DataError("empty dataset")
    if X.shape[0] != y.size:
        raise DimensionError(f"{X.shape[0]} rows but {y.size} labels")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be 0/1")
    return X, y


def bce(p: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
    return float(np.mean(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))))


def cost(model: VqcModel, X, y) -> float:
    X, y = _check_xy(X, y)
    return bce(model.predict_proba(X), y)


def expz_gradient(model: VqcModel, states: np.ndarray, theta=None) -> np.ndarray:
    """d<Z>/dtheta for every row of ``states``; shape ``(B, n_params)``."""
    theta = model.theta if theta is None else np.asarray(theta, dtype=float)
    ansatz = model.ansatz
    n = model.n_qubits
    slot_index = {s: k for k, s in enumerate(ansatz.param_slots)}
    ops = circuit_ops(ansatz, theta)
    grad = np.zeros((states.shape[0], theta.size))
    pre = states
    for g, (gate, (kind, targets, angle)) in enumerate(zip(ansatz.gates, ops)):
        if isinstance(gate.angle, str):
            rule = _SHIFT_FOUR if kind == "CRY" else _SHIFT_TWO
            k = slot_index[gate.angle]
            for shift, weight in rule:
                amps = _apply_op(pre, n, kind, targets, angle + shift)
                for kind2, targets2, angle2 in ops[g + 1:]:
                    amps = _apply_op(amps, n, kind2, targets2, angle2)
                grad[:, k] += weight * expectation_z_batch(amps, n, model.readout_qubit)
        pre = _apply_op(pre, n, kind, targets, angle)
    return grad


def _bce_grad(model: VqcModel, states, y, theta) -> np.ndarray:
    z = _expz(model, states, theta)
    p = (1.0 + z) / 2.0
    inside = (p > PROB_CLIP) & (p < 1.0 - PROB_CLIP)
    pc = np.clip(p, PROB_CLIP, 1.0 - PROB_CLIP)
    dC_dp = np.where(inside, (-y / pc + (1.0 - y) / (1.0 - pc)), 0.0) / y.size
    dz = expz_gradient(model, states, theta)
    return (0.5 * dC_dp) @ dz


def grad_parameter_shift(model: VqcModel, X, y) -> np.ndarray:
    X, y = _check_xy(X, y)
    states = encode_batch(X, model.feature_map)
    return _bce_grad(model, states, y, model.theta)


@dataclass
class TrainConfig:
    optimizer: str = "gradient_descent"
    learning_rate: float = 0.1
    iterations: int = 100
    seed: int = 0
    spsa_a: float = 0.2
    spsa_c: float = 0.1
    spsa_A: float = 20.0
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101

    def __post_init__(self):
        if self.optimizer not in ("spsa", "gradient_descent"):
            raise ParameterError(f"optimizer must be 'spsa' or 'gradient_descent', got {self.optimizer!r}")
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if not self.learning_rate > 0:
            raise ParameterError(f"learning_rate must be > 0, got {self.learning_rate}")


def spsa_step(theta, cost_fn: Callable[[np.ndarray], float], k: int, config: TrainConfig, seed: int) -> np.ndarray:
    if k < 1:
        raise ParameterError(f"SPSA iteration index starts at 1, got {k}")
    theta = np.asarray(theta, dtype=float)
    rng = np.random.default_rng([seed, k])
    delta = rng.integers(0, 2, size=theta.size) * 2.0 - 1.0
    a_k = config.spsa_a / (k + config.spsa_A) ** config.spsa_alpha
    c_k = config.spsa_c / k ** config.spsa_gamma
    diff = cost_fn(theta + c_k * delta) - cost_fn(theta - c_k * delta)
    g = diff / (2.0 * c_k) / delta
    return theta - a_k * g


def make_model(kind: str, feature_map: FeatureMapSpec, layers: int = 2, theta=None) -> VqcModel:
    n = feature_map.n_qubits
    if kind == "vqc":
        ansatz = build_ansatz(n, layers)
    elif kind == "qcnn":
        ansatz = build_qcnn(QcnnSpec(n))
    else:
        raise ParameterError(f"model kind must be 'vqc' or 'qcnn', got {kind!r}")
    if theta is None:
        theta = np.zeros(ansatz.n_params)
    return VqcModel(theta, ansatz, feature_map, 0, kind)


def train(X, y, kind: str = "vqc", config: TrainConfig | None = None,
          feature_map: FeatureMapSpec | None = None, layers: int = 2):
    """Fit a VQC or QCNN. Returns ``(best-loss model, loss trace)``.

    The trace holds the initial loss followed by the loss after each step.
    """
    config = config or TrainConfig()
    X, y = _check_xy(X, y)
    if y.min() == y.max():
        raise DataError("training data contains a single class")
    feature_map = feature_map or FeatureMapSpec(X.shape[1])
    if feature_map.n_qubits != X.shape[1]:
        raise DimensionError(f"feature map encodes {feature_map.n_qubits} features, data has {X.shape[1]}")
    template = make_model(kind, feature_map, layers)
    rng = np.random.default_rng(config.seed)
    theta = rng.uniform(-np.pi, np.pi, template.n_params)
    states = encode_batch(X, feature_map)

    def loss(t):
        return bce(_probs(_expz(template, states, t)), y)

    current = loss(theta)
    trace = [current]
    best_theta, best_loss, best_iter = theta.copy(), current, 0
    for k in range(1, config.iterations + 1):
        if config.optimizer == "gradient_descent":
            theta = theta - config.learning_rate * _bce_grad(template, states, y, theta)
        else:
            theta = spsa_step(theta, loss, k, config, config.seed)
        current = loss(theta)
        if not np.isfinite(current) or not np.all(np.isfinite(theta)):
            raise TrainingError(f"loss became non-finite at iteration {k}")
        trace.append(current)
        if current < best_loss:
            best_theta, best_loss, best_iter = theta.copy(), current, k
    model = template.with_theta(best_theta)
    model.meta.update({"best_iteration": best_iter, "final_theta": theta.tolist(),
                       "optimizer": config.optimizer, "seed": config.seed})
    return model, trace
