"""Benchmark configuration: TOML file -> validated dataclasses.

Every problem found during validation is collected and reported together.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import typing
from dataclasses import dataclass, field

from .errors import ConfigError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

SCHEMA_VERSION = 1
CLASSICAL_MODELS = ("svm", "mlp")
QUANTUM_MODELS = ("qsvm", "vqc", "qcnn")
ALL_MODELS = CLASSICAL_MODELS + QUANTUM_MODELS
DEFAULT_FRACTIONS = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]


@dataclass
class DataConfig:
    path: typing.Optional[str] = None
    schema: typing.Optional[str] = None
    synthetic: typing.Optional[str] = None
    synthetic_m: int = 200
    synthetic_d: int = 8
    separation: float = 2.0
    gap: float = 0.2
    stratified: bool = True


@dataclass
class FeatureMapConfig:
    kind: str = "zz"
    depth: int = 2
    entanglement: str = "linear"


@dataclass
class SvmConfig:
    C: float = 1.0
    tol: float = 1e-3
    gamma: typing.Optional[float] = None


@dataclass
class QsvmConfig:
    C: float = 1.0
    tol: float = 1e-3
    cache_states: bool = False


@dataclass
class VariationalConfig:
    layers: int = 2
    optimizer: str = "gradient_descent"
    learning_rate: float = 0.1
    iterations: int = 50


@dataclass
class MlpConfig:
    hidden: typing.List[int] = field(default_factory=lambda: [64])
    learning_rate: float = 0.05
    epochs: int = 300
    batch: int = 0


@dataclass
class AttackConfig:
    train_fraction: float = 0.7
    epsilons: typing.List[float] = field(default_factory=lambda: [0.0, 0.05, 0.1, 0.2, 0.3])
    noise_levels: typing.List[float] = field(default_factory=lambda: [0.0, 0.01, 0.05, 0.1, 1.0])
    shots: int = 200
    max_samples: int = 100


@dataclass
class KernelDumpConfig:
    max_rows: int = 50


@dataclass
class BenchConfig:
    schema_version: int = SCHEMA_VERSION
    seed: int = 0
    output_dir: str = "bench_out"
    models: typing.List[str] = field(default_factory=lambda: list(CLASSICAL_MODELS))
    fractions: typing.List[float] = field(default_factory=lambda: list(DEFAULT_FRACTIONS))
    n_features: int = 8
    reduce_classical: bool = False
    qml_train_cap: int = 400
    sweep_quantum: bool = False
    save_models: bool = False
    formats: typing.List[str] = field(default_factory=lambda: ["json", "csv", "plotdata"])
    data: DataConfig = field(default_factory=DataConfig)
    feature_map: FeatureMapConfig = field(default_factory=FeatureMapConfig)
    svm: SvmConfig = field(default_factory=SvmConfig)
    qsvm: QsvmConfig = field(default_factory=QsvmConfig)
    vqc: VariationalConfig = field(default_factory=VariationalConfig)
    qcnn: VariationalConfig = field(default_factory=VariationalConfig)
    mlp: MlpConfig = field(default_factory=MlpConfig)
    attack: AttackConfig = field(default_factory=AttackConfig)
    kernel: KernelDumpConfig = field(default_factory=KernelDumpConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _type_ok(value, tp) -> bool:
    origin = typing.get_origin(tp)
    if origin is typing.Union:
        return any(_type_ok(value, a) for a in typing.get_args(tp))
    if tp is type(None):
        return value is None
    if origin in (list, typing.List):
        (inner,) = typing.get_args(tp)
        return isinstance(value, list) and all(_type_ok(v, inner) for v in value)
    if tp is bool:
        return isinstance(value, bool)
    if tp is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if tp is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if tp is str:
        return isinstance(value, str)
    return False


def _coerce(value, tp):
    if tp is float or (typing.get_origin(tp) is typing.Union and float in typing.get_args(tp)):
        return float(value) if isinstance(value, int) else value
    if typing.get_origin(tp) in (list, typing.List) and typing.get_args(tp)[0] is float:
        return [float(v) for v in value]
    return value


def _build(cls, table: dict, where: str, problems: list):
    hints = typing.get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for key in sorted(set(table) - known):
        problems.append(f"{where}{key}: unknown key")
    for f in dataclasses.fields(cls):
        if f.name not in table:
            continue
        value = table[f.name]
        tp = hints[f.name]
        if dataclasses.is_dataclass(tp):
            if not isinstance(value, dict):
                problems.append(f"{where}{f.name}: expected a table")
                continue
            kwargs[f.name] = _build(tp, value, f"{where}{f.name}.", problems)
        elif _type_ok(value, tp):
            kwargs[f.name] = _coerce(value, tp)
        else:
            problems.append(f"{where}{f.name}: expected {getattr(tp, '__name__', str(tp))}, got {value!r}")
    return cls(**kwargs)


def _semantic_checks(cfg: BenchConfig, problems: list) -> None:
    if cfg.schema_version != SCHEMA_VERSION:
        problems.append(f"schema_version: unsupported version {cfg.schema_version}")
    for m in cfg.models:
        if m not in ALL_MODELS:
            problems.append(f"models: unknown model {m!r} (choose from {', '.join(ALL_MODELS)})")
    if len(set(cfg.models)) != len(cfg.models):
        problems.append("models: duplicate entries")
    if not cfg.models:
        problems.append("models: empty list")
    if not cfg.fractions:
        problems.append("fractions: empty list")
    for f in cfg.fractions:
        if not 0.0 < f < 1.0:
            problems.append(f"fractions: {f} outside (0, 1)")
    if cfg.n_features < 1:
        problems.append("n_features: must be >= 1")
    if cfg.qml_train_cap < 2:
        problems.append("qml_train_cap: must be >= 2")
    for fmt in cfg.formats:
        if fmt not in ("json", "csv", "plotdata"):
            problems.append(f"formats: unknown format {fmt!r}")
    d = cfg.data
    if d.synthetic is not None and d.synthetic not in ("blobs", "adhoc"):
        problems.append(f"data.synthetic: must be 'blobs' or 'adhoc', got {d.synthetic!r}")
    if d.synthetic_m < 2:
        problems.append("data.synthetic_m: must be >= 2")
    if d.synthetic == "blobs" and d.synthetic_m % 2:
        problems.append("data.synthetic_m: blobs need an even row count")
    if d.synthetic_d < 1:
        problems.append("data.synthetic_d: must be >= 1")
    if not 0.0 <= d.gap < 1.0:
        problems.append("data.gap: must lie in [0, 1)")
    if d.separation < 0:
        problems.append("data.separation: must be >= 0")
    fm = cfg.feature_map
    if fm.kind not in ("zz", "angle"):
        problems.append(f"feature_map.kind: must be 'zz' or 'angle', got {fm.kind!r}")
    if fm.entanglement not in ("linear", "full"):
        problems.append(f"feature_map.entanglement: must be 'linear' or 'full', got {fm.entanglement!r}")
    if fm.depth < 1:
        problems.append("feature_map.depth: must be >= 1")
    for name in ("svm", "qsvm"):
        sub = getattr(cfg, name)
        if not sub.C > 0:
            problems.append(f"{name}.C: must be > 0")
        if not sub.tol > 0:
            problems.append(f"{name}.tol: must be > 0")
    if cfg.svm.gamma is not None and not cfg.svm.gamma > 0:
        problems.append("svm.gamma: must be > 0")
    for name in ("vqc", "qcnn"):
        sub = getattr(cfg, name)
        if sub.optimizer not in ("gradient_descent", "spsa"):
            problems.append(f"{name}.optimizer: must be 'gradient_descent' or 'spsa'")
        if not sub.learning_rate > 0:
            problems.append(f"{name}.learning_rate: must be > 0")
        if sub.iterations < 1:
            problems.append(f"{name}.iterations: must be >= 1")
        if sub.layers < 0:
            problems.append(f"{name}.layers: must be >= 0")
    if "qcnn" in cfg.models and (cfg.n_features < 2 or cfg.n_features & (cfg.n_features - 1)):
        problems.append("n_features: qcnn needs a power of two >= 2")
    m = cfg.mlp
    if not m.hidden or any(h < 1 for h in m.hidden):
        problems.append("mlp.hidden: layer sizes must be >= 1")
    if not m.learning_rate > 0:
        problems.append("mlp.learning_rate: must be > 0")
    if m.epochs < 0:
        problems.append("mlp.epochs: must be >= 0")
    if m.batch < 0:
        problems.append("mlp.batch: must be >= 0 (0 = full batch)")
    a = cfg.attack
    if not 0.0 < a.train_fraction < 1.0:
        problems.append("attack.train_fraction: must lie in (0, 1)")
    if any(e < 0 for e in a.epsilons):
        problems.append("attack.epsilons: must be >= 0")
    if any(not 0.0 <= p <= 1.0 for p in a.noise_levels):
        problems.append("attack.noise_levels: must lie in [0, 1]")
    if a.shots < 100:
        problems.append("attack.shots: must be >= 100")
    if a.max_samples < 1:
        problems.append("attack.max_samples: must be >= 1")
    if cfg.kernel.max_rows < 1:
        problems.append("kernel.max_rows: must be >= 1")


def config_from_dict(raw: dict, seed_override: int | None = None) -> BenchConfig:
    problems: list[str] = []
    cfg = _build(BenchConfig, raw, "", problems)
    if seed_override is not None:
        cfg.seed = int(seed_override)
    _semantic_checks(cfg, problems)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path, seed_override: int | None = None) -> BenchConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: not valid TOML: {exc}") from exc
    return config_from_dict(raw, seed_override)
