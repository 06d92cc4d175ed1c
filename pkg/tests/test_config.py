from pathlib import Path

import pytest

from qmlbench.config import BenchConfig, config_from_dict, load_config
from qmlbench.errors import ConfigError

CONFIGS = sorted((Path(__file__).resolve().parent.parent / "configs").glob("*.toml"))


def test_defaults():
    cfg = config_from_dict({})
    assert cfg.models == ["svm", "mlp"]
    assert cfg.fractions == [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
    assert cfg.n_features == 8 and cfg.qml_train_cap == 400
    assert cfg.svm.C == 1.0 and cfg.svm.tol == 1e-3
    assert cfg.feature_map.kind == "zz" and cfg.feature_map.depth == 2


def test_unknown_keys_and_all_problems_reported():
    raw = {"modles": ["svm"], "svm": {"C": -1, "kernel": "rbf"}, "fractions": [0.0, 0.5],
           "data": {"synthetic": "moons"}}
    with pytest.raises(ConfigError) as err:
        config_from_dict(raw)
    text = "\n".join(err.value.problems)
    for needle in ("modles: unknown key", "svm.kernel: unknown key", "svm.C", "fractions: 0.0",
                   "data.synthetic"):
        assert needle in text


def test_type_errors():
    with pytest.raises(ConfigError) as err:
        config_from_dict({"seed": "zero", "mlp": {"hidden": [64, "x"]}, "data": 3})
    assert len(err.value.problems) == 3


def test_int_promoted_to_float():
    cfg = config_from_dict({"svm": {"C": 2}})
    assert isinstance(cfg.svm.C, float)


def test_schema_version():
    with pytest.raises(ConfigError, match="schema"):
        config_from_dict({"schema_version": 2})


def test_qcnn_needs_power_of_two():
    with pytest.raises(ConfigError):
        config_from_dict({"models": ["qcnn"], "n_features": 6})


def test_seed_override_and_hash():
    a = config_from_dict({"seed": 1})
    b = config_from_dict({"seed": 1})
    c = config_from_dict({"seed": 1}, seed_override=2)
    assert c.seed == 2
    assert a.config_hash() == b.config_hash() != c.config_hash()
    assert len(a.config_hash()) == 16
    assert isinstance(a, BenchConfig)


def test_bad_toml(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("seed = = 1\n")
    with pytest.raises(ConfigError):
        load_config(p)


@pytest.mark.parametrize("path", CONFIGS, ids=lambda p: p.name)
def test_shipped_configs_validate(path):
    load_config(path)
