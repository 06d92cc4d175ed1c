"""Binary SVM on a precomputed kernel, trained with SMO.

Working-set selection is the second-order rule of Fan, Chen and Lin (2005),
as used by LIBSVM: pick the maximal violator ``i`` from the "up" set, then the
``j`` from the "low" set that maximizes the guaranteed decrease of the dual
objective. Labels are +-1 inside this module.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionError, KernelError, ParameterError
from .qkernel import KernelMatrix, cross_kernel, rbf_cross
from .encoding import FeatureMapSpec

SUPPORT_EPS = 1e-8
_TAU = 1e-12


@dataclass(frozen=True, eq=False)
class SvmModel:
    dual_coefs: np.ndarray
    bias: float
    support_indices: tuple[int, ...]
    C: float
    alphas: np.ndarray
    provenance: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def n_train(self) -> int:
        return self.dual_coefs.size

    def to_dict(self) -> dict:
        return {
            "dual_coefs": self.dual_coefs.tolist(),
            "alphas": self.alphas.tolist(),
            "bias": self.bias,
            "support_indices": list(self.support_indices),
            "C": self.C,
            "provenance": self.provenance,
            "meta": {k: v for k, v in self.meta.items() if k != "objective_trace"},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SvmModel":
        return cls(
            dual_coefs=np.asarray(d["dual_coefs"], dtype=float),
            bias=float(d["bias"]),
            support_indices=tuple(d["support_indices"]),
            C=float(d["C"]),
            alphas=np.asarray(d["alphas"], dtype=float),
            provenance=dict(d.get("provenance", {})),
            meta=dict(d.get("meta", {})),
        )


def to_pm1(labels) -> np.ndarray:
    """Map {0,1} labels to {-1,+1}; +-1 input passes through."""
    y = np.asarray(labels).ravel()
    if np.all((y == 0) | (y == 1)):
        return np.where(y == 1, 1.0, -1.0)
    if np.all((y == 1) | (y == -1)):
        return y.astype(float)
    raise DataError("labels must be 0/1 or -1/+1")


def _bias(alpha, G, y, C):
    yG = y * G
    upper = alpha >= C
    lower = alpha <= 0
    free = ~upper & ~lower
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub = np.inf
        lb = -np.inf
        ub_mask = (upper & (y < 0)) | (lower & (y > 0))
        lb_mask = (upper & (y > 0)) | (lower & (y < 0))
        if ub_mask.any():
            ub = float(yG[ub_mask].min())
        if lb_mask.any():
            lb = float(yG[lb_mask].max())
        rho = (ub + lb) / 2.0
    return -rho


def train_svm(K, labels, C: float = 1.0, tol: float = 1e-3, max_passes: int = 100_000, seed: int = 0) -> SvmModel:
    """Solve the C-SVM dual on kernel ``K`` with labels in {-1,+1} (or {0,1}).

    Stops once the maximal KKT violation drops below ``tol`` or after
    ``max_passes * m`` pair updates. The solver is deterministic; ``seed`` is
    recorded for provenance only.
    """
    Kmat = K.entries if isinstance(K, KernelMatrix) else np.asarray(K, dtype=float)
    y = to_pm1(labels)
    m = y.size
    if Kmat.ndim != 2 or Kmat.shape != (m, m):
        raise DimensionError(f"kernel shape {Kmat.shape} does not match {m} labels")
    if not C > 0:
        raise ParameterError(f"C must be > 0, got {C}")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise DataError("training labels contain a single class")
    if not np.allclose(Kmat, Kmat.T, rtol=0.0, atol=1e-10):
        raise KernelError("kernel matrix is not symmetric")

    Q = (y[:, None] * y[None, :]) * Kmat
    diag = np.diag(Kmat).copy()
    alpha = np.zeros(m)
    G = -np.ones(m)
    objective = [0.0]
    max_iter = max(1, max_passes) * m
    converged = False
    it = 0
    while it < max_iter:
        myG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.flatnonzero(up)[np.argmax(myG[up])])
        gmax = myG[i]
        gmin = myG[low].min()
        if gmax - gmin < tol:
            converged = True
            break
        b = gmax - myG
        cand = low & (b > 0)
        a = diag[i] + diag - 2.0 * y[i] * y * Q[i]
        a = np.where(a > 0, a, _TAU)
        score = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(score))

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = diag[i] + diag[j] + 2.0 * Q[i, j]
            quad = quad if quad > 0 else _TAU
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = diag[i] + diag[j] - 2.0 * Q[i, j]
            quad = quad if quad > 0 else _TAU
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        alpha[i], alpha[j] = ni, nj
        G += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)
        objective.append(float(0.5 * np.dot(alpha, 1.0 - G)))
        it += 1

    bias = _bias(alpha, G, y, C)
    support = tuple(int(k) for k in np.flatnonzero(alpha > SUPPORT_EPS))
    prov = dict(K.provenance) if isinstance(K, KernelMatrix) else {}
    if isinstance(K, KernelMatrix):
        prov["kind"] = K.kind
    return SvmModel(
        dual_coefs=alpha * y,
        bias=float(bias) + 0.0,
        support_indices=support,
        C=float(C),
        alphas=alpha,
        provenance=prov,
        meta={"iterations": it, "converged": converged, "tol": tol, "seed": seed,
              "objective_trace": objective},
    )


def decision_value(model: SvmModel, kernel_row) -> float:
    row = np.asarray(kernel_row, dtype=float).ravel()
    if row.size != model.n_train:
        raise DimensionError(f"kernel row has {row.size} entries, model was trained on {model.n_train}")
    return float(np.dot(model.dual_coefs, row) + model.bias)


def decision_values(model: SvmModel, kernel_rows) -> np.ndarray:
    rows = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
    if rows.shape[1] != model.n_train:
        raise DimensionError(f"kernel rows have {rows.shape[1]} columns, model was trained on {model.n_train}")
    return rows @ model.dual_coefs + model.bias


def predict(model: SvmModel, kernel_rows) -> np.ndarray:
    """+-1 predictions; a decision value of exactly 0 maps to +1."""
    return np.where(decision_values(model, kernel_rows) >= 0, 1, -1)


class SvmClassifier:
    """An ``SvmModel`` bundled with its training rows and kernel.

    ``kernel`` is ``"rbf"`` (uses ``gamma``) or ``"quantum"`` (uses
    ``feature_map``). Predictions are {0,1}.
    """

    def __init__(self, model: SvmModel, X_train, kernel: str, gamma: float | None = None,
                 feature_map: FeatureMapSpec | None = None, cache_states: bool = False):
        if kernel not in ("rbf", "quantum"):
            raise ParameterError(f"unknown kernel {kernel!r}")
        if kernel == "rbf" and gamma is None:
            raise ParameterError("rbf kernel needs gamma")
        if kernel == "quantum" and feature_map is None:
            raise ParameterError("quantum kernel needs a feature map")
        self.model = model
        self.X_train = np.asarray(X_train, dtype=float)
        self.kernel = kernel
        self.gamma = gamma
        self.feature_map = feature_map
        self.cache_states = cache_states

    @property
    def kind(self) -> str:
        return "qsvm" if self.kernel == "quantum" else "svm"

    @property
    def n_features(self) -> int:
        return self.X_train.shape[1]

    def kernel_rows(self, X, check: bool = True) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kernel == "rbf":
            return rbf_cross(X, self.X_train, self.gamma)
        return cross_kernel(X, self.X_train, self.feature_map, cache_states=self.cache_states, check=check)

    def decision_function(self, X, check: bool = True) -> np.ndarray:
        return decision_values(self.model, self.kernel_rows(X, check))

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0).astype(int)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "kernel": self.kernel,
            "gamma": self.gamma,
            "feature_map": None if self.feature_map is None else self.feature_map.to_dict(),
            "X_train": self.X_train.tolist(),
            "model": self.model.to_dict(),
        }
