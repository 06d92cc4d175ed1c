"""Classical preprocessing and quantum feature-map circuits."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import DataError, DimensionError, EncodingError, ParameterError
from .simcore import Circuit, Gate, run_ops, zero_batch

ANGLE_MAX = np.pi
_RANGE_SLACK = 1e-9


@dataclass(frozen=True)
class FeatureMapSpec:
    """Feature-map shape. ``kind`` is ``"zz"`` (pairwise phases) or ``"angle"``."""

    n_qubits: int
    depth: int = 2
    entanglement: str = "linear"
    kind: str = "zz"

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ParameterError("feature map needs n_qubits >= 1")
        if self.depth < 1:
            raise ParameterError("feature map needs depth >= 1")
        if self.entanglement not in ("linear", "full"):
            raise ParameterError(f"entanglement must be 'linear' or 'full', got {self.entanglement!r}")
        if self.kind not in ("zz", "angle"):
            raise ParameterError(f"kind must be 'zz' or 'angle', got {self.kind!r}")

    @property
    def pairs(self) -> list[tuple[int, int]]:
        if self.kind != "zz":
            return []
        if self.entanglement == "linear":
            return [(i, i + 1) for i in range(self.n_qubits - 1)]
        return list(combinations(range(self.n_qubits), 2))

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "depth": self.depth,
                "entanglement": self.entanglement, "kind": self.kind}


@dataclass(frozen=True)
class ScalingSpec:
    """Per-feature min/max learned on training rows; maps onto [0, pi]."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    @property
    def n_features(self) -> int:
        return len(self.mins)

    @property
    def constant(self) -> tuple[bool, ...]:
        return tuple(lo == hi for lo, hi in zip(self.mins, self.maxs))

    def to_dict(self) -> dict:
        return {"mins": list(self.mins), "maxs": list(self.maxs)}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingSpec":
        return cls(tuple(map(float, d["mins"])), tuple(map(float, d["maxs"])))


def fit_scaler(train_features) -> ScalingSpec:
    X = np.asarray(train_features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise DataError("cannot fit a scaler on an empty matrix")
    return ScalingSpec(tuple(X.min(axis=0).tolist()), tuple(X.max(axis=0).tolist()))


def scale(spec: ScalingSpec, x) -> np.ndarray:
    """Affine map onto [0, pi]; values outside the training range are clamped.

    Accepts a single vector or a matrix of rows.
    """
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (spec.n_features,):
        raise DimensionError(f"expected {spec.n_features} features, got shape {arr.shape}")
    lo = np.asarray(spec.mins)
    hi = np.asarray(spec.maxs)
    span = hi - lo
    const = span == 0
    safe = np.where(const, 1.0, span)
    out = (arr - lo) / safe * ANGLE_MAX
    out = np.where(const, ANGLE_MAX / 2, out)
    return np.clip(out, 0.0, ANGLE_MAX)


def _point_biserial(col: np.ndarray, y: np.ndarray) -> float:
    c = col - col.mean()
    sc = np.sqrt(np.dot(c, c))
    if sc == 0:
        return 0.0
    d = y - y.mean()
    return float(np.dot(c, d) / (sc * np.sqrt(np.dot(d, d))))


def rank_features(features, labels) -> list[tuple[int, float]]:
    """Rank columns by |point-biserial correlation| with a {0,1} label.

    Returns ``(column index, score)`` pairs, best first; ties go to the lower
    index.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise DimensionError(f"features {X.shape} do not match {y.size} labels")
    if X.shape[0] < 2:
        raise DataError("ranking needs at least two rows")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be 0/1")
    if y.min() == y.max():
        raise DataError("ranking needs both classes present")
    scores = [abs(_point_biserial(np.ascontiguousarray(X[:, j]), y)) for j in range(X.shape[1])]
    order = sorted(range(len(scores)), key=lambda j: (-scores[j], j))
    return [(j, scores[j]) for j in order]


def top_columns(ranking, k: int) -> list[int]:
    """Indices of the ``k`` best-ranked columns, in original column order."""
    d = len(ranking)
    if not 1 <= k <= d:
        raise ParameterError(f"k must lie in 1..{d}, got {k}")
    return sorted(j for j, _ in ranking[:k])


def reduce(features, ranking, k: int) -> np.ndarray:
    X = np.asarray(features, dtype=float)
    if X.shape[1] != len(ranking):
        raise DimensionError(f"ranking covers {len(ranking)} columns, matrix has {X.shape[1]}")
    return X[:, top_columns(ranking, k)]


def _check_scaled(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != n:
        raise DimensionError(f"feature map encodes {n} features, got shape {x.shape}")
    if np.any(x < -_RANGE_SLACK) or np.any(x > ANGLE_MAX + _RANGE_SLACK) or not np.all(np.isfinite(x)):
        raise EncodingError("feature-map input must be scaled into [0, pi]")
    return x


def feature_map_ops(cols, spec: FeatureMapSpec) -> list[tuple]:
    """Op list ``(kind, targets, angle)`` for per-qubit inputs ``cols``.

    Each ``cols[i]`` is a float, or an array holding one value per batch row.
    """
    n = spec.n_qubits
    ops: list[tuple] = []
    for _ in range(spec.depth):
        ops.extend(("H", (q,), None) for q in range(n))
        ops.extend(("RZ", (q,), 2.0 * cols[q]) for q in range(n))
        for i, j in spec.pairs:
            ops.append(("CX", (i, j), None))
            ops.append(("RZ", (j,), 2.0 * (np.pi - cols[i]) * (np.pi - cols[j])))
            ops.append(("CX", (i, j), None))
    return ops


def build_feature_map(x, spec: FeatureMapSpec) -> Circuit:
    x = _check_scaled(x, spec.n_qubits)
    if x.ndim != 1:
        raise DimensionError("build_feature_map takes a single vector")
    gates = [Gate(kind, targets, None if a is None else float(a))
             for kind, targets, a in feature_map_ops(list(x), spec)]
    return Circuit(spec.n_qubits, gates)


def encode_batch(X, spec: FeatureMapSpec, check: bool = True) -> np.ndarray:
    """Statevectors |Phi(x)> for every row of ``X`` as a ``(B, 2**n)`` array."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if check:
        _check_scaled(X, spec.n_qubits)
    elif X.shape[1] != spec.n_qubits:
        raise DimensionError(f"feature map encodes {spec.n_qubits} features, got {X.shape[1]}")
    cols = [X[:, q] for q in range(spec.n_qubits)]
    return run_ops(zero_batch(spec.n_qubits, X.shape[0]), spec.n_qubits, feature_map_ops(cols, spec))
