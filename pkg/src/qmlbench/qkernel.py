"""Fidelity quantum kernel and the classical RBF kernel.

Every quantum kernel entry re-simulates both feature-map states, which is
what a compute/uncompute kernel evaluation costs on a simulator; the
simulations for one Gram row run as a single batch. ``cache_states=True``
simulates each row once instead. Entries are bit-identical either way.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .encoding import FeatureMapSpec, _check_scaled, encode_batch
from .errors import DimensionError, ParameterError


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    entries: np.ndarray
    kind: str
    provenance: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.entries.shape[0]


def _states(X: np.ndarray, spec: FeatureMapSpec) -> np.ndarray:
    return encode_batch(X, spec, check=False)


def _fidelities(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Row-wise |<a|b>|^2. Every path goes through here so results match bitwise."""
    return np.abs(np.sum(A.conj() * B, axis=1)) ** 2


def _fresh_row(x: np.ndarray, B: np.ndarray, spec: FeatureMapSpec) -> np.ndarray:
    # one new simulation of x per entry, one of each b
    return _fidelities(_states(np.repeat(x[None, :], B.shape[0], axis=0), spec), _states(B, spec))


def _cached_row(a: np.ndarray, SB: np.ndarray) -> np.ndarray:
    return _fidelities(np.repeat(a[None, :], SB.shape[0], axis=0), SB)


def kernel_entry(x, z, spec: FeatureMapSpec) -> float:
    """|<Phi(x)|Phi(z)>|^2 from two fresh simulations."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != (spec.n_qubits,) or z.shape != (spec.n_qubits,):
        raise DimensionError(f"kernel inputs must have length {spec.n_qubits}, got {x.shape} and {z.shape}")
    _check_scaled(x, spec.n_qubits)
    _check_scaled(z, spec.n_qubits)
    return float(_fidelities(_states(x[None, :], spec), _states(z[None, :], spec))[0])


def _rows(X, spec: FeatureMapSpec, check: bool = True) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != spec.n_qubits:
        raise DimensionError(f"feature map encodes {spec.n_qubits} features, got {X.shape[1]} columns")
    return _check_scaled(X, spec.n_qubits) if check else X


def kernel_matrix(X, spec: FeatureMapSpec, cache_states: bool = False) -> KernelMatrix:
    X = _rows(X, spec)
    m = X.shape[0]
    if m < 1:
        raise DimensionError("kernel_matrix needs at least one row")
    K = np.empty((m, m))
    states = _states(X, spec) if cache_states else None
    for i in range(m):
        row = _cached_row(states[i], states[i:]) if cache_states else _fresh_row(X[i], X[i:], spec)
        K[i, i:] = row
        K[i:, i] = row
    return KernelMatrix(K, "quantum", {"feature_map": spec.to_dict()})


def cross_kernel(X_test, X_train, spec: FeatureMapSpec, cache_states: bool = False,
                 check: bool = True) -> np.ndarray:
    """Rectangular kernel block; ``check=False`` skips the [0, pi] input check."""
    A = _rows(X_test, spec, check)
    B = _rows(X_train, spec)
    out = np.empty((A.shape[0], B.shape[0]))
    if cache_states:
        sa, sb = _states(A, spec), _states(B, spec)
        for i in range(A.shape[0]):
            out[i] = _cached_row(sa[i], sb)
    else:
        for i in range(A.shape[0]):
            out[i] = _fresh_row(A[i], B, spec)
    return out


def default_gamma(n_features: int) -> float:
    return 1.0 / n_features


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    d = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d, 0.0)


def rbf_kernel_matrix(X, gamma: float) -> KernelMatrix:
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    D = _sq_dists(X, X)
    D = (D + D.T) / 2.0
    np.fill_diagonal(D, 0.0)
    return KernelMatrix(np.exp(-gamma * D), "rbf", {"gamma": float(gamma)})


def rbf_cross(X_test, X_train, gamma: float) -> np.ndarray:
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    A = np.atleast_2d(np.asarray(X_test, dtype=float))
    B = np.atleast_2d(np.asarray(X_train, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DimensionError(f"column counts differ: {A.shape[1]} vs {B.shape[1]}")
    return np.exp(-gamma * _sq_dists(A, B))


def write_kernel_csv(K, path) -> None:
    """Full matrix, row-major, 17 significant digits."""
    entries = K.entries if isinstance(K, KernelMatrix) else np.asarray(K)
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in entries:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def read_kernel_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
