"""Adversarial (FGSM) and quantum-noise robustness probes.

All attacks work in the scaled feature space [0, pi]^d so classical and
quantum models face the same perturbation budget.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .encoding import ANGLE_MAX, build_feature_map
from .errors import DataError, DimensionError, EncodingError, ModelKindError, ParameterError
from .kernelmachine import SvmClassifier, to_pm1
from .mlp import MlpModel, mlp_input_gradient
from .simcore import noisy_expectation_z
from .varmodels import VqcModel, bce

FD_STEP = 1e-4


@dataclass(frozen=True)
class AttackReport:
    model_id: str
    attack: str
    strength: float
    clean_accuracy: float
    attacked_accuracy: float
    n_samples: int
    seed: int
    perturbation_norms: tuple[float, ...] = ()
    shots: int | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["perturbation_norms"] = list(self.perturbation_norms)
        return d


def _model_id(model) -> str:
    return getattr(model, "kind", type(model).__name__.lower())


def _loss_batch(model, X, y) -> np.ndarray:
    """Per-row loss used for numeric input gradients."""
    if isinstance(model, VqcModel):
        p = model.predict_proba(X, check=False)
        return np.array([bce(np.array([pi]), np.array([y])) for pi in p])
    if isinstance(model, SvmClassifier):
        return -to_pm1([y])[0] * model.decision_function(X, check=False)
    raise ModelKindError(f"no numeric loss for {type(model).__name__}")


def input_gradient(model, x, y, h: float = FD_STEP) -> np.ndarray:
    """d(loss)/dx at one scaled input.

    MLPs use exact backprop on BCE. Quantum models (BCE) and SVMs (margin
    loss ``-y f(x)``) use central differences with step ``h``.
    """
    x = np.asarray(x, dtype=float)
    if isinstance(model, MlpModel):
        return mlp_input_gradient(model, x, y)
    if isinstance(model, VqcModel):
        d = model.feature_map.n_qubits
    elif isinstance(model, SvmClassifier):
        d = model.n_features
    else:
        raise ModelKindError(f"cannot attack a {type(model).__name__}")
    if x.shape != (d,):
        raise DimensionError(f"model expects {d} inputs, got shape {x.shape}")
    probes = np.repeat(x[None, :], 2 * d, axis=0)
    for i in range(d):
        probes[2 * i, i] += h
        probes[2 * i + 1, i] -= h
    losses = _loss_batch(model, probes, y)
    return (losses[0::2] - losses[1::2]) / (2.0 * h)


def fgsm(model, x, y, epsilon: float, lo: float = 0.0, hi: float = ANGLE_MAX) -> np.ndarray:
    """One signed-gradient step of size ``epsilon``, clamped to [lo, hi]."""
    if epsilon < 0:
        raise ParameterError(f"epsilon must be >= 0, got {epsilon}")
    x = np.asarray(x, dtype=float)
    if np.any(x < lo - 1e-9) or np.any(x > hi + 1e-9):
        raise EncodingError("fgsm input must already lie in the scaled range")
    if epsilon == 0:
        return x.copy()
    x_adv = np.clip(x + epsilon * np.sign(input_gradient(model, x, y)), lo, hi)
    assert np.max(np.abs(x_adv - x)) <= epsilon + 1e-12
    return x_adv


def accuracy(model, X, y) -> float:
    return float(np.mean(model.predict(X) == np.asarray(y)))


def robustness_sweep(model, X, y, epsilons, seed: int = 0, model_id: str | None = None) -> list[AttackReport]:
    """FGSM accuracy for each budget in ``epsilons`` on the same samples."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y).ravel().astype(int)
    if y.size == 0:
        raise DataError("robustness sweep needs a nonempty test set")
    model_id = model_id or _model_id(model)
    clean = accuracy(model, X, y)
    reports = []
    for eps in epsilons:
        eps = float(eps)
        if eps == 0:
            reports.append(AttackReport(model_id, "fgsm", eps, clean, clean, y.size, seed,
                                        tuple(0.0 for _ in range(y.size))))
            continue
        adv = np.array([fgsm(model, xi, yi, eps) for xi, yi in zip(X, y)])
        norms = np.max(np.abs(adv - X), axis=1)
        reports.append(AttackReport(model_id, "fgsm", eps, clean, accuracy(model, adv, y), y.size, seed,
                                    tuple(float(v) for v in norms)))
    return reports


def _trajectory_seed(seed: int, level: int, row: int) -> int:
    return int(np.random.SeedSequence([seed, level, row]).generate_state(1)[0])


def noisy_predict(model: VqcModel, X, noise_p: float, shots: int, seed: int, level: int = 0) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    preds = np.empty(X.shape[0], dtype=int)
    for i, x in enumerate(X):
        circuit = build_feature_map(x, model.feature_map).then(model.ansatz)
        z = noisy_expectation_z(circuit, model.theta, model.readout_qubit, noise_p, shots,
                                _trajectory_seed(seed, level, i))
        preds[i] = 1 if (1.0 + z) / 2.0 >= 0.5 else 0
    return preds


def noise_degradation(model, X, y, noise_levels, shots: int = 200, seed: int = 0,
                      model_id: str | None = None) -> list[AttackReport]:
    """Accuracy of a variational model when its readout runs under Pauli noise."""
    if not isinstance(model, VqcModel):
        raise ModelKindError(f"noise degradation needs a VQC or QCNN, got {type(model).__name__}")
    if shots < 100:
        raise ParameterError(f"shots must be >= 100, got {shots}")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y).ravel().astype(int)
    if y.size == 0:
        raise DataError("noise degradation needs a nonempty test set")
    model_id = model_id or model.kind
    clean = accuracy(model, X, y)
    reports = []
    for level, p in enumerate(noise_levels):
        preds = noisy_predict(model, X, float(p), shots, seed, level)
        reports.append(AttackReport(model_id, "noise", float(p), clean, float(np.mean(preds == y)),
                                    y.size, seed, (), shots))
    return reports
