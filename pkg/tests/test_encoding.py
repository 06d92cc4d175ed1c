import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

import dense
from qmlbench.encoding import (
    FeatureMapSpec, build_feature_map, fit_scaler, rank_features, reduce, scale,
)
from qmlbench.errors import DataError, DimensionError, EncodingError, ParameterError
from qmlbench.simcore import apply_circuit, new_zero_state


def test_fit_scaler_examples():
    s = fit_scaler(np.array([[0.0], [10.0]]))
    assert s.mins[0] == 0 and s.maxs[0] == 10
    s2 = fit_scaler(np.array([[5.0, 1.0], [5.0, 3.0], [5.0, 2.0]]))
    assert s2.constant == (True, False)
    assert s2.mins[1] == 1 and s2.maxs[1] == 3
    assert np.allclose(scale(s2, [5.0, 2.0]), [np.pi / 2, np.pi / 2])
    with pytest.raises(DataError):
        fit_scaler(np.empty((0, 2)))


def test_scale_examples_and_clamp():
    s = fit_scaler(np.array([[0.0], [10.0]]))
    assert scale(s, [0.0])[0] == 0.0
    assert scale(s, [10.0])[0] == np.pi
    assert abs(scale(s, [5.0])[0] - np.pi / 2) < 1e-15
    assert scale(s, [-3.0])[0] == 0.0 and scale(s, [42.0])[0] == np.pi
    with pytest.raises(DimensionError):
        scale(s, [1.0, 2.0])


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 12), st.integers(1, 5)),
              elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_scaling_idempotent(X):
    once = scale(fit_scaler(X), X)
    twice = scale(fit_scaler(once), once)
    assert np.all((once >= 0) & (once <= np.pi))
    assert np.max(np.abs(once - twice)) < 1e-12


def test_rank_features_examples():
    y = np.array([0, 1, 0, 1, 1, 0])
    X = np.column_stack([np.full(6, 3.0), y.astype(float), np.arange(6.0)])
    ranking = rank_features(X, y)
    assert ranking[0][0] == 1 and abs(ranking[0][1] - 1.0) < 1e-12
    scores = dict(ranking)
    assert scores[0] == 0.0
    with pytest.raises(DataError):
        rank_features(X, np.ones(6))


def test_rank_ties_lower_index_first():
    y = np.array([0, 1, 0, 1])
    X = np.column_stack([y, y, y]).astype(float)
    assert [j for j, _ in rank_features(X, y)] == [0, 1, 2]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 31), st.integers(2, 6))
def test_rank_permutation_equivariant(seed, d):
    rng = np.random.default_rng(seed)
    y = np.array([0, 1] * 10)
    X = rng.normal(size=(20, d)) + rng.normal(size=d) * y[:, None]
    perm = rng.permutation(d)
    base = rank_features(X, y)
    permuted = rank_features(X[:, perm], y)
    # column perm[k] of the original is column k of the permuted matrix
    assert [perm[j] for j, _ in permuted] == [j for j, _ in base]
    assert np.allclose([s for _, s in permuted], [s for _, s in base], atol=1e-12)


def test_reduce():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(30, 32))
    y = (X[:, 20] + 0.5 * X[:, 3] > 0).astype(int)
    ranking = rank_features(X, y)
    assert np.array_equal(reduce(X, ranking, 32), X)
    one = reduce(X, ranking, 1)
    assert np.array_equal(one[:, 0], X[:, ranking[0][0]])
    eight = reduce(X, ranking, 8)
    cols = sorted(j for j, _ in ranking[:8])
    assert np.array_equal(eight, X[:, cols])
    for k in (0, 33):
        with pytest.raises(ParameterError):
            reduce(X, ranking, k)


def test_zz_gate_list_for_zero_input():
    c = build_feature_map(np.zeros(2), FeatureMapSpec(2, depth=1))
    got = [(g.kind, g.targets, g.angle) for g in c.gates]
    assert got == [("H", (0,), None), ("H", (1,), None), ("RZ", (0,), 0.0), ("RZ", (1,), 0.0),
                   ("CX", (0, 1), None), ("RZ", (1,), 2 * np.pi ** 2), ("CX", (0, 1), None)]
    assert c.n_params == 0


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_angle_map_zero_input(depth):
    # at x = 0 every RZ is the identity, so the layers reduce to H^depth
    state = apply_circuit(new_zero_state(3), build_feature_map(np.zeros(3), FeatureMapSpec(3, depth, kind="angle")))
    want = np.full(8, 8 ** -0.5) if depth % 2 else np.eye(8)[0]
    assert np.allclose(state.amplitudes, want, atol=1e-12)


def test_zz_state_matches_dense_oracle():
    x = np.array([np.pi / 2, np.pi / 3])
    state = apply_circuit(new_zero_state(2), build_feature_map(x, FeatureMapSpec(2, depth=2)))
    want = dense.run(dense.zz_feature_map(x, depth=2), 2)
    assert np.max(np.abs(state.amplitudes - want)) < 1e-12


def test_full_entanglement_pairs():
    assert FeatureMapSpec(3, entanglement="linear").pairs == [(0, 1), (1, 2)]
    assert FeatureMapSpec(3, entanglement="full").pairs == [(0, 1), (0, 2), (1, 2)]


def test_unscaled_input_rejected():
    with pytest.raises(EncodingError):
        build_feature_map(np.array([0.1, 4.0]), FeatureMapSpec(2))
    with pytest.raises(DimensionError):
        build_feature_map(np.array([0.1]), FeatureMapSpec(2))


@settings(max_examples=50, deadline=None)
@given(arrays(float, 3, elements=st.floats(0, np.pi)), st.sampled_from(["zz", "angle"]))
def test_feature_map_state_normalized(x, kind):
    s = apply_circuit(new_zero_state(3), build_feature_map(x, FeatureMapSpec(3, kind=kind)))
    assert abs(s.norm() - 1) < 1e-10
