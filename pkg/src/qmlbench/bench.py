"""Benchmark harness: train every model family per training fraction and report
accuracy, CPU time and memory."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import CLASSICAL_MODELS, QUANTUM_MODELS, BenchConfig
from .dataio import Dataset, adhoc_theta, load_dataset, load_schema, split, subsample, synth_adhoc, synth_blobs
from .encoding import FeatureMapSpec, ScalingSpec, fit_scaler, rank_features, scale, top_columns
from .errors import DataError
from .kernelmachine import SvmClassifier, train_svm
from .mlp import mlp_train
from .qkernel import default_gamma, kernel_matrix, rbf_kernel_matrix
from .simcore import statevector_bytes
from .varmodels import TrainConfig, train

try:
    import resource
except ImportError:  # not on every platform
    resource = None

DATA_ENV = "QMLBENCH_DATA"
VOLATILE_FIELDS = ("train_cpu_seconds", "predict_cpu_seconds", "peak_memory_bytes")


@dataclass
class BenchRow:
    model: str
    train_fraction: float
    test_accuracy: float | None
    train_cpu_seconds: float | None
    predict_cpu_seconds: float | None
    peak_memory_bytes: int | None
    memory_kind: str
    statevector_bytes: int
    n_qubits: int
    n_features: int
    parameter_count: int | None
    train_size: int
    test_size: int
    train_cap: int | None
    seed: int
    config_hash: str
    error: str | None = None


@dataclass
class BenchReport:
    rows: list[BenchRow]
    config_hash: str
    config: dict = field(default_factory=dict)
    tool_version: str = __version__

    def stable_rows(self) -> list[dict]:
        """Rows without timing and measured-memory fields."""
        out = []
        for r in self.rows:
            d = dataclasses.asdict(r)
            for k in VOLATILE_FIELDS:
                d.pop(k)
            out.append(d)
        return out


# --------------------------------------------------------------------------
# data + preprocessing


def resolve_data_path(cfg: BenchConfig) -> str | None:
    return cfg.data.path or os.environ.get(DATA_ENV) or None


def load_bench_data(cfg: BenchConfig) -> Dataset:
    d = cfg.data
    if d.synthetic == "blobs":
        return synth_blobs(d.synthetic_m, d.synthetic_d, d.separation, cfg.seed)
    if d.synthetic == "adhoc":
        spec = FeatureMapSpec(d.synthetic_d, cfg.feature_map.depth, cfg.feature_map.entanglement,
                              cfg.feature_map.kind)
        theta = adhoc_theta(d.synthetic_d, cfg.vqc.layers, cfg.seed)
        return synth_adhoc(d.synthetic_m, spec, theta, d.gap, cfg.seed, layers=cfg.vqc.layers)
    path = resolve_data_path(cfg)
    if path is None:
        raise DataError(f"no dataset: set data.path, {DATA_ENV}, or data.synthetic")
    if not os.path.exists(path):
        raise FileNotFoundError(f"dataset file not found: {path}")
    schema = load_schema(d.schema) if d.schema else load_schema()
    return load_dataset(path, schema)


@dataclass
class Prepared:
    """One split after ranking/reduction and scaling, fitted on training rows only."""

    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    columns: list[int]
    scaler: ScalingSpec


def prepare(train_ds: Dataset, test_ds: Dataset, k: int | None) -> Prepared:
    if k is None or k >= train_ds.d:
        cols = list(range(train_ds.d))
    else:
        cols = top_columns(rank_features(train_ds.features, train_ds.labels), k)
    scaler = fit_scaler(train_ds.features[:, cols])
    return Prepared(scale(scaler, train_ds.features[:, cols]), train_ds.labels,
                    scale(scaler, test_ds.features[:, cols]), test_ds.labels, cols, scaler)


def feature_map_for(cfg: BenchConfig, n: int) -> FeatureMapSpec:
    fm = cfg.feature_map
    return FeatureMapSpec(n, fm.depth, fm.entanglement, fm.kind)


# --------------------------------------------------------------------------
# per-model training


def fit_model(name: str, X, y, cfg: BenchConfig, seed: int):
    """Train model ``name`` on scaled rows; returns an object with ``predict``."""
    if name == "svm":
        gamma = cfg.svm.gamma or default_gamma(X.shape[1])
        model = train_svm(rbf_kernel_matrix(X, gamma), y, cfg.svm.C, cfg.svm.tol, seed=seed)
        return SvmClassifier(model, X, "rbf", gamma=gamma)
    if name == "qsvm":
        spec = feature_map_for(cfg, X.shape[1])
        K = kernel_matrix(X, spec, cache_states=cfg.qsvm.cache_states)
        model = train_svm(K, y, cfg.qsvm.C, cfg.qsvm.tol, seed=seed)
        return SvmClassifier(model, X, "quantum", feature_map=spec, cache_states=cfg.qsvm.cache_states)
    if name == "mlp":
        m = cfg.mlp
        model, _ = mlp_train(X, y, [X.shape[1], *m.hidden, 1], m.learning_rate, m.epochs,
                             m.batch or None, seed)
        return model
    if name in ("vqc", "qcnn"):
        v = getattr(cfg, name)
        tc = TrainConfig(optimizer=v.optimizer, learning_rate=v.learning_rate,
                         iterations=v.iterations, seed=seed)
        model, _ = train(X, y, name, tc, feature_map_for(cfg, X.shape[1]), v.layers)
        return model
    raise ValueError(f"unknown model {name!r}")


def parameter_count(model) -> int:
    if isinstance(model, SvmClassifier):
        return len(model.model.support_indices) + 1
    return int(model.n_params)


def _peak_memory():
    if resource is None:
        return None
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # Linux reports KiB, macOS bytes
    return int(peak if os.uname().sysname == "Darwin" else peak * 1024)


def run_cell(name: str, fraction: float, ds: Dataset, cfg: BenchConfig, config_hash: str):
    """Train and evaluate one cell. Returns ``(row, model, prepared)``; failures give ``(row, None, None)``."""
    seed = cfg.seed
    quantum = name in QUANTUM_MODELS
    base = dict(model=name, train_fraction=fraction, seed=seed, config_hash=config_hash)
    try:
        train_ds, test_ds = split(ds, fraction, seed, cfg.data.stratified)
        cap = None
        if quantum:
            cap = cfg.qml_train_cap
            train_ds = subsample(train_ds, cap, seed)
        k = cfg.n_features if (quantum or cfg.reduce_classical) else None
        prep = prepare(train_ds, test_ds, k)
        n_feat = len(prep.columns)
        n_qubits = n_feat if quantum else 0

        t0 = time.process_time()
        model = fit_model(name, prep.X_train, prep.y_train, cfg, seed)
        t1 = time.process_time()
        preds = model.predict(prep.X_test)
        t2 = time.process_time()

        peak = _peak_memory()
        sv = statevector_bytes(n_qubits) if quantum else 0
        return BenchRow(
            **base,
            test_accuracy=float(np.mean(preds == prep.y_test)),
            train_cpu_seconds=t1 - t0,
            predict_cpu_seconds=t2 - t1,
            peak_memory_bytes=peak if peak is not None else sv,
            memory_kind="measured" if peak is not None else "theoretical",
            statevector_bytes=sv,
            n_qubits=n_qubits,
            n_features=n_feat,
            parameter_count=parameter_count(model),
            train_size=train_ds.m,
            test_size=test_ds.m,
            train_cap=cap,
        ), model, prep
    except Exception as exc:  # isolate per-model failures
        return BenchRow(**base, test_accuracy=None, train_cpu_seconds=None, predict_cpu_seconds=None,
                        peak_memory_bytes=None, memory_kind="none", statevector_bytes=0, n_qubits=0,
                        n_features=0, parameter_count=None, train_size=0, test_size=0, train_cap=None,
                        error=f"{type(exc).__name__}: {exc}"), None, None


def _save_model(cfg: BenchConfig, name: str, fraction: float, model, prep: Prepared, ds: Dataset) -> None:
    out = os.path.join(cfg.output_dir, "models")
    os.makedirs(out, exist_ok=True)
    doc = {
        "tool_version": __version__,
        "config_hash": cfg.config_hash(),
        "model": name,
        "train_fraction": fraction,
        "feature_columns": [ds.feature_names[c] for c in prep.columns],
        "scaler": prep.scaler.to_dict(),
        "params": model.to_dict(),
    }
    with open(os.path.join(out, f"{name}_{fraction:g}.json"), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def run_benchmark(cfg: BenchConfig, models=None, fractions=None, dataset: Dataset | None = None) -> BenchReport:
    """Every (model, fraction) cell, ordered by model list then fraction."""
    models = list(cfg.models if models is None else models)
    fractions = list(cfg.fractions if fractions is None else fractions)
    ds = dataset if dataset is not None else load_bench_data(cfg)
    h = cfg.config_hash()
    rows = []
    for name in models:
        for fraction in fractions:
            row, model, prep = run_cell(name, fraction, ds, cfg, h)
            rows.append(row)
            if cfg.save_models and model is not None:
                _save_model(cfg, name, fraction, model, prep, ds)
    return BenchReport(rows, h, cfg.to_dict())


def sweep_fractions(cfg: BenchConfig, dataset: Dataset | None = None) -> BenchReport:
    """All configured fractions for the classical models, plus quantum ones if ``sweep_quantum``."""
    models = [m for m in cfg.models if m in CLASSICAL_MODELS or cfg.sweep_quantum]
    if not models:
        models = list(CLASSICAL_MODELS)
    return run_benchmark(cfg, models, cfg.fractions, dataset)


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def report_json(report: BenchReport) -> str:
    doc = {
        "tool": "qmlbench",
        "tool_version": report.tool_version,
        "config_hash": report.config_hash,
        "config": report.config,
        "rows": [dataclasses.asdict(r) for r in report.rows],
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def report_csv(report: BenchReport) -> str:
    names = [f.name for f in dataclasses.fields(BenchRow)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names)
    for r in report.rows:
        w.writerow([_fmt(getattr(r, n)) for n in names])
    return buf.getvalue()


def report_plotdata(report: BenchReport) -> str:
    """Blocks of ``train_fraction test_accuracy`` per model, separated by two blank lines."""
    order = []
    for r in report.rows:
        if r.model not in order:
            order.append(r.model)
    blocks = []
    for name in order:
        lines = [f"# model: {name}", "# train_fraction test_accuracy"]
        for r in report.rows:
            if r.model == name and r.test_accuracy is not None:
                lines.append(f"{r.train_fraction!r} {r.test_accuracy!r}")
        blocks.append("\n".join(lines) + "\n")
    return "\n\n".join(blocks)


def emit_report(report: BenchReport, out_dir, formats=("json", "csv", "plotdata"), stem: str = "report") -> dict:
    if not report.rows:
        raise DataError("refusing to write an empty report")
    os.makedirs(out_dir, exist_ok=True)
    writers = {"json": (report_json, ".json"), "csv": (report_csv, ".csv"), "plotdata": (report_plotdata, "_plot.dat")}
    paths = {}
    for fmt in formats:
        render, suffix = writers[fmt]
        path = os.path.join(out_dir, stem + suffix)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render(report))
        paths[fmt] = path
    return paths


def attack_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2) + "\n"


def attack_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model_id", "attack", "strength", "clean_accuracy", "attacked_accuracy", "n_samples",
                "max_perturbation", "shots", "seed"])
    for r in reports:
        maxp = max(r.perturbation_norms) if r.perturbation_norms else ""
        w.writerow([r.model_id, r.attack, repr(r.strength), repr(r.clean_accuracy), repr(r.attacked_accuracy),
                    r.n_samples, _fmt(maxp), _fmt(r.shots), r.seed])
    return buf.getvalue()
