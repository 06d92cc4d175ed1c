import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import dense
from qmlbench.dataio import adhoc_theta, synth_adhoc
from qmlbench.encoding import FeatureMapSpec
from qmlbench.errors import DataError, ParameterError
from qmlbench.simcore import Circuit, Gate, apply_circuit, expectation_z, new_zero_state
from qmlbench.varmodels import (
    QcnnSpec, TrainConfig, bce, build_ansatz, build_qcnn, cost, forward, grad_parameter_shift,
    make_model, spsa_step, train,
)

# reference run for learnability, see the decisions ledger
ADHOC_SEED = 0
TRAIN_SEED = 1000


def fd_gradient(model, X, y, h=1e-5):
    g = np.zeros(model.n_params)
    for k in range(model.n_params):
        tp, tm = model.theta.copy(), model.theta.copy()
        tp[k] += h
        tm[k] -= h
        g[k] = (cost(model.with_theta(tp), X, y) - cost(model.with_theta(tm), X, y)) / (2 * h)
    return g


def rel_err(g, ref):
    return np.max(np.abs(g - ref) / np.maximum(np.abs(ref), 1e-3))


def test_ansatz_counts():
    c = build_ansatz(1, 1)
    assert [(g.kind, g.targets) for g in c.gates] == [("RY", (0,))] and c.n_params == 1
    assert build_ansatz(4, 3).n_params == 12
    ring = [g.targets for g in build_ansatz(3, 1).gates if g.kind == "CZ"]
    assert ring == [(0, 1), (1, 2), (2, 0)]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_zero_theta_ansatz_on_uniform_input(n):
    hs = Circuit(n, [Gate("H", (q,)) for q in range(n)])
    ansatz = build_ansatz(n, 2)
    state = apply_circuit(apply_circuit(new_zero_state(n), hs), ansatz, np.zeros(ansatz.n_params))
    assert abs(expectation_z(state, 0)) < 1e-12


@pytest.mark.parametrize("n,params", [(2, 6), (4, 12), (8, 18), (16, 24)])
def test_qcnn_parameter_count(n, params):
    spec = QcnnSpec(n)
    assert spec.layers == int(np.log2(n))
    assert spec.n_params == params == build_qcnn(spec).n_params


@pytest.mark.parametrize("n", [1, 3, 6])
def test_qcnn_needs_power_of_two(n):
    with pytest.raises(ParameterError):
        QcnnSpec(n)


def test_forward_identity_ansatz():
    model = make_model("vqc", FeatureMapSpec(2, 1, kind="angle"), layers=0)
    assert model.n_params == 0
    assert abs(forward(model, np.zeros(2)) - 0.5) < 1e-12


def test_forward_matches_dense_vqc():
    x = np.array([0.4, 2.2])
    theta = np.array([0.3, -1.1, 2.5, 0.7])
    model = make_model("vqc", FeatureMapSpec(2), layers=2, theta=theta)
    gates = dense.zz_feature_map(x, 2) + [
        ("RY", (0,), theta[0]), ("RY", (1,), theta[1]), ("CZ", (0, 1), None),
        ("RY", (0,), theta[2]), ("RY", (1,), theta[3]), ("CZ", (0, 1), None)]
    want = (1 + dense.expz(dense.run(gates, 2), 0)) / 2
    assert abs(forward(model, x) - want) < 1e-12


def test_forward_matches_dense_qcnn():
    rng = np.random.default_rng(1)
    x = rng.uniform(0, np.pi, 4)
    model = make_model("qcnn", FeatureMapSpec(4), theta=rng.uniform(-np.pi, np.pi, 12))
    bound = model.ansatz.bind(model.theta)
    gates = dense.zz_feature_map(x, 2) + [(g.kind, g.targets, g.angle) for g in bound.gates]
    want = (1 + dense.expz(dense.run(gates, 4), 0)) / 2
    assert abs(forward(model, x) - want) < 1e-12


def test_forward_range():
    rng = np.random.default_rng(2)
    for kind, n in (("vqc", 3), ("qcnn", 4)):
        model = make_model(kind, FeatureMapSpec(n), theta=rng.uniform(-np.pi, np.pi, make_model(kind, FeatureMapSpec(n)).n_params))
        p = model.predict_proba(rng.uniform(0, np.pi, (5000, n)))
        assert p.min() >= 0 and p.max() <= 1


def test_cost_closed_forms():
    assert bce(np.array([1.0, 0.0]), np.array([1.0, 0.0])) <= 1e-11
    assert abs(bce(np.full(4, 0.5), np.array([0, 1, 1, 0])) - np.log(2)) < 1e-15
    assert abs(bce(np.array([0.25]), np.array([1.0])) - 1.3862943611198906) < 1e-12
    model = make_model("vqc", FeatureMapSpec(2))
    with pytest.raises(DataError):
        cost(model, np.empty((0, 2)), [])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([("vqc", 2), ("vqc", 3), ("vqc", 4), ("qcnn", 2), ("qcnn", 4)]))
def test_parameter_shift_matches_finite_difference(seed, kind_n):
    kind, n = kind_n
    rng = np.random.default_rng(seed)
    template = make_model(kind, FeatureMapSpec(n), layers=2)
    model = template.with_theta(rng.uniform(-np.pi, np.pi, template.n_params))
    X = rng.uniform(0, np.pi, (8, n))
    y = rng.integers(0, 2, 8)
    assert rel_err(grad_parameter_shift(model, X, y), fd_gradient(model, X, y)) < 1e-6


def test_discarded_parameter_has_zero_gradient():
    # last-layer RY on qubits other than the readout is followed only by CZs, which commute with Z_0
    rng = np.random.default_rng(3)
    n, layers = 3, 2
    model = make_model("vqc", FeatureMapSpec(n), layers, rng.uniform(-np.pi, np.pi, n * layers))
    X = rng.uniform(0, np.pi, (6, n))
    g = grad_parameter_shift(model, X, rng.integers(0, 2, 6))
    last = (layers - 1) * n
    assert np.all(np.abs(g[last + 1:last + n]) < 1e-10)
    assert np.abs(g[last]) > 1e-6


def test_gradient_duplication_invariant():
    rng = np.random.default_rng(4)
    model = make_model("vqc", FeatureMapSpec(3), 2, rng.uniform(-np.pi, np.pi, 6))
    X = rng.uniform(0, np.pi, (5, 3))
    y = rng.integers(0, 2, 5)
    g1 = grad_parameter_shift(model, X, y)
    g2 = grad_parameter_shift(model, np.vstack([X, X]), np.concatenate([y, y]))
    assert np.max(np.abs(g1 - g2)) < 1e-12


def test_spsa_constant_cost():
    theta = np.array([0.3, -0.2, 1.0])
    assert np.array_equal(spsa_step(theta, lambda t: 4.2, 1, TrainConfig(), 0), theta)


def _scalar_spsa(theta, steps, a=0.2, c=0.1, A=20, seed=0):
    for k in range(1, steps + 1):
        d = np.random.default_rng([seed, k]).integers(0, 2, 1)[0] * 2.0 - 1.0
        ck = c / k ** 0.101
        g = ((theta + ck * d) ** 2 - (theta - ck * d) ** 2) / (2 * ck) / d
        theta = theta - a / (k + A) ** 0.602 * g
    return theta


def test_spsa_quadratic():
    cfg = TrainConfig()
    theta = np.array([1.0])
    hits = None
    for k in range(1, 201):
        theta = spsa_step(theta, lambda t: float(t[0] ** 2), k, cfg, seed=0)
        if hits is None and abs(theta[0]) < 0.1:
            hits = k
    assert hits is not None
    assert abs(theta[0] - _scalar_spsa(1.0, 200)) < 1e-12


def test_spsa_seeded_perturbation():
    cfg = TrainConfig()
    f = lambda t: float(np.sum(np.sin(t)))
    a = spsa_step(np.zeros(5), f, 3, cfg, 7)
    assert np.array_equal(a, spsa_step(np.zeros(5), f, 3, cfg, 7))
    with pytest.raises(ParameterError):
        spsa_step(np.zeros(5), f, 0, cfg, 7)


def _adhoc(m=200):
    spec = FeatureMapSpec(2)
    return spec, synth_adhoc(m, spec, adhoc_theta(2, 2, ADHOC_SEED), 0.2, ADHOC_SEED)


def test_train_contract_and_determinism():
    spec, ds = _adhoc(40)
    with pytest.raises(ParameterError):
        TrainConfig(iterations=0)
    model, trace = train(ds.features, ds.labels, "vqc", TrainConfig(iterations=1, seed=5), spec)
    assert len(trace) == 2
    a = train(ds.features, ds.labels, "qcnn", TrainConfig(iterations=5, seed=5), spec)
    b = train(ds.features, ds.labels, "qcnn", TrainConfig(iterations=5, seed=5), spec)
    assert a[1] == b[1] and np.array_equal(a[0].theta, b[0].theta)
    s1 = train(ds.features, ds.labels, "vqc", TrainConfig("spsa", iterations=5, seed=5), spec)
    s2 = train(ds.features, ds.labels, "vqc", TrainConfig("spsa", iterations=5, seed=5), spec)
    assert s1[1] == s2[1]
    assert model.meta["seed"] == 5


def test_train_rejects_single_class():
    spec, ds = _adhoc(20)
    with pytest.raises(DataError):
        train(ds.features, np.ones(20), "vqc", TrainConfig(iterations=1), spec)


def test_vqc_learns_adhoc():
    spec, ds = _adhoc()
    model, trace = train(ds.features, ds.labels, "vqc",
                         TrainConfig(learning_rate=0.1, iterations=200, seed=TRAIN_SEED), spec, layers=2)
    assert np.mean(model.predict(ds.features) == ds.labels) >= 0.90
    assert trace[0] > min(trace)


def test_small_lr_trace_mostly_decreasing():
    spec, ds = _adhoc(100)
    _, trace = train(ds.features, ds.labels, "vqc", TrainConfig(learning_rate=0.01, iterations=60, seed=TRAIN_SEED), spec)
    steps = np.diff(trace)
    assert np.mean(steps <= 0) >= 0.9


def test_model_serialises():
    model = make_model("qcnn", FeatureMapSpec(2), theta=np.arange(6.0))
    d = model.to_dict()
    assert d["kind"] == "qcnn" and d["theta"] == list(np.arange(6.0))
    assert len(d["ansatz"]["param_slots"]) == 6
