"""Tabular dataset ingestion, splits and synthetic data generators."""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .encoding import FeatureMapSpec, encode_batch
from .errors import DataError, DimensionError, GenerationError, ParameterError, SchemaError

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

MAX_ADHOC_DRAWS = 10**6


@dataclass(frozen=True)
class IngestReport:
    rows_read: int
    rows_rejected: int
    rejected_lines: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class Dataset:
    feature_names: tuple[str, ...]
    features: np.ndarray
    labels: np.ndarray
    row_ids: np.ndarray = None
    ingest: IngestReport | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels).ravel().astype(int)
        if X.ndim != 2:
            raise DimensionError(f"features must be a matrix, got shape {X.shape}")
        if X.shape[0] != y.size:
            raise DimensionError(f"{X.shape[0]} rows but {y.size} labels")
        if X.shape[1] != len(self.feature_names):
            raise DimensionError(f"{len(self.feature_names)} names for {X.shape[1]} columns")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("labels must be 0/1")
        ids = np.arange(y.size) if self.row_ids is None else np.asarray(self.row_ids, dtype=int)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "row_ids", ids)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    @property
    def m(self) -> int:
        return self.labels.size

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def take(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.feature_names, self.features[idx], self.labels[idx], self.row_ids[idx])

    def with_features(self, X, names=None) -> "Dataset":
        names = self.feature_names if names is None else names
        return Dataset(names, X, self.labels, self.row_ids)


# --------------------------------------------------------------------------
# schema + CSV


@dataclass(frozen=True)
class Schema:
    label_column: str
    drop_columns: tuple[str, ...] = ()
    expected_feature_count: int | None = None
    feature_columns: tuple[str, ...] = ()
    name: str = ""


def load_schema(path=None) -> Schema:
    """Read a schema descriptor (TOML). ``None`` loads the bundled one."""
    if path is None:
        raw = resources.files("qmlbench").joinpath("data/alzheimers_schema.toml").read_bytes()
    else:
        with open(path, "rb") as fh:
            raw = fh.read()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except tomllib.TOMLDecodeError as exc:
        raise SchemaError(f"schema descriptor is not valid TOML: {exc}") from exc
    if doc.get("schema_version") != 1:
        raise SchemaError(f"unsupported schema_version {doc.get('schema_version')!r}")
    if "label_column" not in doc:
        raise SchemaError("schema descriptor lacks label_column")
    return Schema(
        label_column=doc["label_column"],
        drop_columns=tuple(doc.get("drop_columns", ())),
        expected_feature_count=doc.get("expected_feature_count"),
        feature_columns=tuple(doc.get("feature_columns", ())),
        name=doc.get("name", ""),
    )


def bundled_fixture_path() -> str:
    return str(resources.files("qmlbench").joinpath("data/alzheimers_fixture.csv"))


def load_csv(path, label_column: str, drop_columns=()) -> Dataset:
    """Parse a header-first numeric CSV.

    Rows whose retained cells do not parse as numbers (or that have the wrong
    cell count) are skipped and counted in ``dataset.ingest``.
    """
    path = os.fspath(path)
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, no header row") from None
        if label_column not in header:
            raise SchemaError(f"{path}: label column {label_column!r} not in header")
        drop = set(drop_columns)
        keep = [i for i, h in enumerate(header) if h != label_column and h not in drop]
        li = header.index(label_column)
        rows, labels, rejected = [], [], []
        n_read = 0
        for line_no, cells in enumerate(reader, start=2):
            if not cells or all(not c.strip() for c in cells):
                continue
            n_read += 1
            if len(cells) != len(header):
                rejected.append(line_no)
                continue
            try:
                values = [float(cells[i]) for i in keep]
                label = float(cells[li])
            except ValueError:
                rejected.append(line_no)
                continue
            if not all(math.isfinite(v) for v in values) or not math.isfinite(label):
                rejected.append(line_no)
                continue
            if label not in (0.0, 1.0):
                raise SchemaError(f"{path}:{line_no}: label {cells[li]!r} is not 0/1")
            rows.append(values)
            labels.append(int(label))
    if not rows:
        raise DataError(f"{path}: no usable rows")
    return Dataset(
        feature_names=tuple(header[i] for i in keep),
        features=np.array(rows, dtype=float),
        labels=np.array(labels, dtype=int),
        ingest=IngestReport(n_read, len(rejected), tuple(rejected)),
    )


def load_dataset(path, schema: Schema | None = None) -> Dataset:
    """``load_csv`` driven by a schema, checking the feature count."""
    schema = schema or load_schema()
    ds = load_csv(path, schema.label_column, schema.drop_columns)
    if schema.expected_feature_count is not None and ds.d != schema.expected_feature_count:
        raise SchemaError(f"{path}: expected {schema.expected_feature_count} features, found {ds.d}")
    return ds


# --------------------------------------------------------------------------
# splits


def _n_take(count: int, fraction: float) -> int:
    return int(math.floor(count * fraction + 0.5))


def _class_quotas(counts, fraction: float) -> list[int]:
    """Largest-remainder allocation: totals round(m*f), each class within 1 of n_c*f."""
    exact = [c * fraction for c in counts]
    quotas = [int(math.floor(e)) for e in exact]
    spare = _n_take(sum(counts), fraction) - sum(quotas)
    # ties go to the lower class label
    order = sorted(range(len(counts)), key=lambda k: (-(exact[k] - quotas[k]), k))
    for k in order[:max(spare, 0)]:
        quotas[k] += 1
    return quotas


def split(dataset: Dataset, train_fraction: float, seed: int = 0, stratified: bool = True):
    """Seeded train/test partition. Both halves keep the original row order."""
    if not 0.0 < train_fraction < 1.0:
        raise ParameterError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    if stratified:
        train_idx = []
        members = [np.flatnonzero(dataset.labels == cls) for cls in (0, 1)]
        quotas = _class_quotas([idx.size for idx in members], train_fraction)
        for idx, quota in zip(members, quotas):
            idx = idx[rng.permutation(idx.size)]
            train_idx.extend(idx[:quota])
        train_idx = np.asarray(train_idx, dtype=int)
    else:
        order = rng.permutation(dataset.m)
        train_idx = order[:_n_take(dataset.m, train_fraction)]
    mask = np.zeros(dataset.m, dtype=bool)
    mask[train_idx] = True
    if mask.all() or not mask.any():
        raise ParameterError(
            f"train_fraction={train_fraction} on {dataset.m} rows leaves an empty train or test side")
    return dataset.take(np.flatnonzero(mask)), dataset.take(np.flatnonzero(~mask))


def subsample(dataset: Dataset, cap: int, seed: int = 0) -> Dataset:
    """Stratified subsample of at most ``cap`` rows (identity when already small)."""
    if dataset.m <= cap:
        return dataset
    sub, _ = split(dataset, cap / dataset.m, seed=seed, stratified=True)
    return sub


# --------------------------------------------------------------------------
# synthetic data


def adhoc_theta(n_qubits: int, layers: int, seed: int) -> np.ndarray:
    # separate stream from the trainer's initialiser, which also draws Uniform(-pi, pi)
    return np.random.default_rng([seed, 0xAD]).uniform(-np.pi, np.pi, n_qubits * layers)


def synth_adhoc(m: int, spec: FeatureMapSpec, theta_star, gap: float, seed: int = 0,
                layers: int | None = None) -> Dataset:
    """Data labelled by a fixed variational classifier.

    Points are uniform in [0, pi]^n; a draw is kept only when the labelling
    model's ``|<Z>|`` is at least ``gap``. Label 1 means ``<Z> >= 0``. Each
    class is filled up to ceil(m/2) so the labels stay balanced.
    """
    from .varmodels import _expz, make_model

    if m < 2:
        raise ParameterError(f"m must be >= 2, got {m}")
    if not 0.0 <= gap < 1.0:
        raise ParameterError(f"gap must lie in [0, 1), got {gap}")
    theta_star = np.asarray(theta_star, dtype=float).ravel()
    n = spec.n_qubits
    if layers is None:
        if theta_star.size % n:
            raise DimensionError(f"theta_star length {theta_star.size} is not a multiple of {n} qubits")
        layers = theta_star.size // n
    labeller = make_model("vqc", spec, layers, theta_star)
    rng = np.random.default_rng(seed)
    quota = (m + 1) // 2
    counts = [0, 0]
    xs, ys = [], []
    drawn = 0
    while len(ys) < m:
        if drawn >= MAX_ADHOC_DRAWS:
            raise GenerationError(
                f"only {len(ys)} of {m} points passed gap={gap} within {MAX_ADHOC_DRAWS} draws")
        size = min(512, MAX_ADHOC_DRAWS - drawn)
        cand = rng.uniform(0.0, np.pi, (size, n))
        drawn += size
        z = _expz(labeller, encode_batch(cand, spec), theta_star)
        for x, zv in zip(cand, z):
            if abs(zv) < gap:
                continue
            label = 1 if zv >= 0 else 0
            if counts[label] >= quota:
                continue
            counts[label] += 1
            xs.append(x)
            ys.append(label)
            if len(ys) == m:
                break
    return Dataset(tuple(f"x{i}" for i in range(n)), np.array(xs), np.array(ys))


def synth_blobs(m: int, d: int, separation: float, seed: int = 0) -> Dataset:
    """Two unit-variance Gaussian clusters centred at -+separation/2 on every axis."""
    if m < 2 or m % 2:
        raise ParameterError(f"m must be a positive even number, got {m}")
    if separation < 0:
        raise ParameterError(f"separation must be >= 0, got {separation}")
    rng = np.random.default_rng(seed)
    half = m // 2
    labels = np.repeat([0, 1], half)
    centres = np.where(labels[:, None] == 1, separation / 2.0, -separation / 2.0)
    X = centres + rng.standard_normal((m, d))
    order = rng.permutation(m)
    return Dataset(tuple(f"x{i}" for i in range(d)), X[order], labels[order])
