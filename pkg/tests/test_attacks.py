import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from qmlbench.attacks import (
    AttackReport, fgsm, input_gradient, noise_degradation, robustness_sweep,
)
from qmlbench.bench import prepare
from qmlbench.dataio import adhoc_theta, split, synth_adhoc, synth_blobs
from qmlbench.encoding import FeatureMapSpec
from qmlbench.errors import DataError, EncodingError, ModelKindError, ParameterError
from qmlbench.kernelmachine import SvmClassifier, train_svm
from qmlbench.mlp import MlpModel, init_mlp, mlp_input_gradient, mlp_train
from qmlbench.qkernel import kernel_matrix
from qmlbench.varmodels import TrainConfig, make_model, train

# reference MLP run, see the decisions ledger
BLOBS_SEED = 0
EPSILONS = [0.0, 0.05 * np.pi, 0.1 * np.pi, 0.2 * np.pi, 0.3 * np.pi]


@pytest.fixture(scope="module")
def blobs_mlp():
    ds = synth_blobs(200, 2, 2.0, BLOBS_SEED)
    tr, te = split(ds, 0.7, BLOBS_SEED)
    p = prepare(tr, te, None)
    model, _ = mlp_train(p.X_train, p.y_train, lr=0.05, epochs=300, seed=BLOBS_SEED)
    return model, p.X_test, p.y_test


@pytest.fixture(scope="module")
def adhoc_vqc():
    spec = FeatureMapSpec(2)
    ds = synth_adhoc(200, spec, adhoc_theta(2, 2, 0), 0.2, 0)
    tr, te = split(ds, 0.5, 0)
    model, _ = train(tr.features, tr.labels, "vqc", TrainConfig(iterations=100, seed=1000), spec)
    return model, tr, te


def test_mlp_gradient_is_delegated():
    model = init_mlp([3, 4, 1], 1)
    x = np.array([0.2, 1.0, 2.5])
    assert np.array_equal(input_gradient(model, x, 1), mlp_input_gradient(model, x, 1))
    zero = MlpModel((np.zeros((3, 2)), np.zeros((2, 1))), (np.zeros(2), np.zeros(1)))
    assert np.all(input_gradient(zero, x, 0) == 0)


def _rel(a, b):
    return np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-3))


def test_quantum_gradient_step_sizes_agree(adhoc_vqc):
    model, tr, _ = adhoc_vqc
    for x, y in zip(tr.features[:5], tr.labels[:5]):
        x = np.clip(x, 0.01, np.pi - 0.01)
        assert _rel(input_gradient(model, x, y, h=1e-4), input_gradient(model, x, y, h=1e-6)) < 1e-3


def test_svm_gradient_step_sizes_agree(adhoc_vqc):
    _, tr, _ = adhoc_vqc
    spec = FeatureMapSpec(2)
    X, y = tr.features[:30], tr.labels[:30]
    clf = SvmClassifier(train_svm(kernel_matrix(X, spec), y), X, "quantum", feature_map=spec)
    for x, lab in zip(X[:3], y[:3]):
        x = np.clip(x, 0.01, np.pi - 0.01)
        assert _rel(input_gradient(clf, x, lab, h=1e-4), input_gradient(clf, x, lab, h=1e-6)) < 1e-3


@settings(max_examples=200, deadline=None)
@given(arrays(float, 3, elements=st.floats(0, np.pi)), st.integers(0, 1), st.floats(0, 4))
def test_fgsm_budget(x, y, eps):
    model = init_mlp([3, 5, 1], 2)
    adv = fgsm(model, x, y, eps)
    assert np.max(np.abs(adv - x)) <= eps + 1e-12
    assert adv.min() >= 0 and adv.max() <= np.pi


def test_fgsm_budget_many_probes():
    rng = np.random.default_rng(0)
    model = init_mlp([4, 8, 1], 3)
    X = rng.uniform(0, np.pi, (10_000, 4))
    eps = rng.uniform(0, 1, 10_000)
    for x, e, y in zip(X, eps, rng.integers(0, 2, 10_000)):
        assert np.max(np.abs(fgsm(model, x, y, e) - x)) <= e + 1e-12


def test_fgsm_errors_and_identity():
    model = init_mlp([2, 3, 1], 0)
    x = np.array([0.5, 1.0])
    assert np.array_equal(fgsm(model, x, 1, 0.0), x)
    with pytest.raises(ParameterError):
        fgsm(model, x, 1, -0.1)
    with pytest.raises(EncodingError):
        fgsm(model, np.array([5.0, 1.0]), 1, 0.1)
    with pytest.raises(ModelKindError):
        input_gradient(object(), x, 1)


def test_mlp_sweep_reference(blobs_mlp):
    model, X, y = blobs_mlp
    reps = robustness_sweep(model, X, y, EPSILONS, seed=BLOBS_SEED)
    assert [r.strength for r in reps] == EPSILONS
    assert reps[0].attacked_accuracy == reps[0].clean_accuracy
    assert len({r.clean_accuracy for r in reps}) == 1
    for r in reps:
        assert all(n <= r.strength + 1e-12 for n in r.perturbation_norms)
        assert r.n_samples == y.size
    assert reps[-1].attacked_accuracy < reps[-1].clean_accuracy
    assert reps[-1].clean_accuracy - reps[-1].attacked_accuracy >= 0.10
    acc = [r.attacked_accuracy for r in reps]
    assert np.mean(np.diff(acc) <= 0) >= 0.8


def test_sweep_empty_rejected():
    with pytest.raises(DataError):
        robustness_sweep(init_mlp([2, 2, 1], 0), np.empty((0, 2)), [], [0.1])


def test_noise_degradation(adhoc_vqc):
    model, _, te = adhoc_vqc
    reps = noise_degradation(model, te.features, te.labels, [0.0, 1.0], shots=200, seed=4)
    clean = reps[0].clean_accuracy
    assert reps[0].attacked_accuracy == clean
    assert te.m >= 100 and abs(te.labels.mean() - 0.5) < 0.05
    assert 0.35 <= reps[1].attacked_accuracy <= 0.65
    again = noise_degradation(model, te.features, te.labels, [0.0, 1.0], shots=200, seed=4)
    assert [r.to_dict() for r in reps] == [r.to_dict() for r in again]


def test_noise_degradation_validation(adhoc_vqc):
    model, _, te = adhoc_vqc
    with pytest.raises(ModelKindError):
        noise_degradation(init_mlp([2, 2, 1], 0), te.features, te.labels, [0.1])
    with pytest.raises(ParameterError):
        noise_degradation(model, te.features, te.labels, [0.1], shots=50)


def test_report_dict():
    r = AttackReport("mlp", "fgsm", 0.1, 0.9, 0.8, 2, 0, (0.1, 0.05))
    assert r.to_dict()["perturbation_norms"] == [0.1, 0.05]
