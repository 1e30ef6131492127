"""Tabular data ingestion, preprocessing and resampling helpers."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

JITTER_SD = 1e-3
MIN_DISTINCT = 10


class DatasetError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledDataset:
    """Numeric instance matrix with a per-row outlier flag.

    ``labels`` is a boolean vector, ``True`` marking an outlier.
    ``provenance`` holds the source path and the list of applied transforms.
    """

    instances: np.ndarray
    labels: np.ndarray
    attribute_names: tuple[str, ...]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.array(self.instances, dtype=float)
        y = np.asarray(self.labels, dtype=bool)
        if X.ndim != 2:
            raise DatasetError("instances must be a 2-d matrix")
        if X.shape[0] < 1:
            raise DatasetError("dataset has no rows")
        if y.shape != (X.shape[0],):
            raise DatasetError("labels must have one entry per row")
        if len(self.attribute_names) != X.shape[1]:
            raise DatasetError("attribute_names must match the column count")
        if not np.all(np.isfinite(X)):
            raise DatasetError("instances contain non-finite values")
        X.setflags(write=False)
        y = y.copy()
        y.setflags(write=False)
        object.__setattr__(self, "instances", X)
        object.__setattr__(self, "labels", y)
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))

    @property
    def n(self) -> int:
        return self.instances.shape[0]

    @property
    def d(self) -> int:
        return self.instances.shape[1]

    @property
    def regulars(self) -> np.ndarray:
        return self.instances[~self.labels]

    @property
    def outliers(self) -> np.ndarray:
        return self.instances[self.labels]

    @property
    def n_outliers(self) -> int:
        return int(self.labels.sum())

    def subset(self, rows, transform: dict | None = None) -> "LabeledDataset":
        rows = np.asarray(rows)
        prov = _with_transform(self.provenance, transform) if transform else dict(self.provenance)
        return LabeledDataset(self.instances[rows], self.labels[rows], self.attribute_names, prov)

    @classmethod
    def from_parts(cls, regulars, outliers, attribute_names=None, provenance=None) -> "LabeledDataset":
        regulars = np.atleast_2d(np.asarray(regulars, dtype=float))
        outliers = np.asarray(outliers, dtype=float).reshape(-1, regulars.shape[1])
        X = np.vstack([regulars, outliers])
        y = np.r_[np.zeros(len(regulars), bool), np.ones(len(outliers), bool)]
        if attribute_names is None:
            attribute_names = tuple(f"x{j}" for j in range(X.shape[1]))
        return cls(X, y, tuple(attribute_names), dict(provenance or {}))


def _with_transform(provenance: dict, transform: dict) -> dict:
    prov = dict(provenance)
    prov["transforms"] = list(provenance.get("transforms", [])) + [transform]
    return prov


def load_csv(path, label_column: str, outlier_value: str) -> LabeledDataset:
    """Read a comma separated file with a header row.

    Rows whose ``label_column`` equals ``outlier_value`` become outliers.
    A column counts as text, and is dropped with a warning, when most of its
    cells do not parse as numbers. Any unparsable or non-finite cell in a
    numeric column is an error naming the row.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path} is empty") from None
        rows = [r for r in reader if r]
    if label_column not in header:
        raise DatasetError(f"label column not found: {label_column!r}")
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise DatasetError(f"row {i}: expected {len(header)} fields, got {len(r)}")
    if not rows:
        raise DatasetError(f"{path} has no data rows")

    label_idx = header.index(label_column)
    labels = np.array([r[label_idx].strip() == outlier_value for r in rows])

    names, columns = [], []
    for j, name in enumerate(header):
        if j == label_idx:
            continue
        cells = [r[j].strip() for r in rows]
        parsed = [_parse_float(c) for c in cells]
        n_bad = sum(p is None for p in parsed)
        if n_bad > len(cells) / 2:
            warnings.warn(f"dropping non-numeric column {name!r}", stacklevel=2)
            continue
        for i, p in enumerate(parsed):
            if p is None:
                raise DatasetError(f"row {i}: unparsable value {cells[i]!r} in column {name!r}")
            if not math.isfinite(p):
                raise DatasetError(f"row {i}: non-finite value in column {name!r}")
        names.append(name)
        columns.append(parsed)
    if not columns:
        raise DatasetError("zero numeric columns")

    X = np.array(columns, dtype=float).T
    prov = {"source": str(path), "label_column": label_column,
            "outlier_value": outlier_value, "transforms": []}
    return LabeledDataset(X, labels, tuple(names), prov)


def _parse_float(cell: str):
    try:
        return float(cell)
    except ValueError:
        return None


def _dedupe(X: np.ndarray) -> np.ndarray:
    """Indices of first occurrences of each distinct row, in original order."""
    seen: set[bytes] = set()
    keep = []
    for i, row in enumerate(np.ascontiguousarray(X)):
        key = row.tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return np.asarray(keep, dtype=int)


def preprocess(data: LabeledDataset) -> LabeledDataset:
    """Drop low-cardinality attributes, min-max normalize, remove duplicate rows.

    Steps are repeated until nothing changes so the result is a fixed point
    (normalization rounding can in principle merge rows).
    """
    if data.d < 1:
        raise DatasetError("no attributes")
    X = np.array(data.instances)
    y = np.array(data.labels)
    names = list(data.attribute_names)
    dropped: list[str] = []
    n_duplicates = 0
    scale: dict[str, tuple[float, float]] = {}

    while True:
        changed = False
        keep_cols = []
        for j, name in enumerate(names):
            col = X[:, j]
            n_distinct = np.unique(col).size
            if n_distinct < MIN_DISTINCT:
                if n_distinct == 1:
                    warnings.warn(f"removing constant attribute {name!r}", stacklevel=2)
                dropped.append(name)
                changed = True
            else:
                keep_cols.append(j)
        if not keep_cols:
            raise DatasetError("no usable attributes")
        X = X[:, keep_cols]
        names = [names[j] for j in keep_cols]

        lo, hi = X.min(axis=0), X.max(axis=0)
        if np.any(lo != 0.0) or np.any(hi != 1.0):
            for j, name in enumerate(names):
                prev = scale.get(name, (0.0, 1.0))
                # compose with any earlier pass so the record maps raw -> final
                scale[name] = (prev[0] + lo[j] * prev[1], (hi[j] - lo[j]) * prev[1])
            X = (X - lo) / (hi - lo)
            changed = True

        keep_rows = _dedupe(X)
        if keep_rows.size != X.shape[0]:
            n_duplicates += X.shape[0] - keep_rows.size
            X, y = X[keep_rows], y[keep_rows]
            changed = True
        if not changed:
            break

    transform = {"op": "preprocess", "dropped_attributes": dropped,
                 "duplicates_removed": n_duplicates,
                 "scaling": {k: list(v) for k, v in scale.items() if k in names}}
    if not dropped and not n_duplicates and not transform["scaling"]:
        return data
    return LabeledDataset(X, y, tuple(names), _with_transform(data.provenance, transform))


def jitter(data: LabeledDataset, seed: int, sd: float = JITTER_SD) -> LabeledDataset:
    """Copy of ``data`` with i.i.d. N(0, sd^2) noise on every value.

    Only meant as fitting input for generative models.
    """
    rng = np.random.default_rng(seed)
    X = data.instances + rng.normal(0.0, sd, size=data.instances.shape)
    return LabeledDataset(X, data.labels, data.attribute_names,
                          _with_transform(data.provenance, {"op": "jitter", "sd": sd, "seed": seed}))


def jitter_matrix(X: np.ndarray, seed: int, sd: float = JITTER_SD) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.asarray(X, dtype=float) + rng.normal(0.0, sd, size=np.shape(X))


@dataclass(frozen=True)
class SplitPair:
    train: LabeledDataset
    test: LabeledDataset
    train_rows: np.ndarray
    test_rows: np.ndarray


def stratified_split(data: LabeledDataset, train_fraction: float, seed: int) -> SplitPair:
    """Per-class split without replacement.

    Each class contributes ``floor(fraction * size)`` rows to train, moved by
    one row if needed so both sides hold at least one member of every class.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError("train_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for flag in (False, True):
        members = np.flatnonzero(data.labels == flag)
        if members.size < 2:
            kind = "outlier" if flag else "regular"
            raise DatasetError(f"cannot stratify: fewer than 2 {kind} rows")
        k = math.floor(train_fraction * members.size)
        k = min(max(k, 1), members.size - 1)
        perm = rng.permutation(members)
        train_idx.append(perm[:k])
        test_idx.append(perm[k:])
    train_rows = np.sort(np.concatenate(train_idx))
    test_rows = np.sort(np.concatenate(test_idx))
    info = {"train_fraction": train_fraction, "seed": seed}
    return SplitPair(
        data.subset(train_rows, {"op": "split", "side": "train", **info}),
        data.subset(test_rows, {"op": "split", "side": "test", **info}),
        train_rows, test_rows,
    )


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def outlier_target(n_regular: int, xi: float) -> int:
    """Solve ``k = round(xi * (n_regular + k))`` by fixed-point iteration."""
    k = _round_half_up(xi * n_regular / (1.0 - xi))
    for _ in range(100):
        k_next = _round_half_up(xi * (n_regular + k))
        if k_next == k:
            break
        k = k_next
    return k


def downsample_outliers(data: LabeledDataset, xi: float, seed: int) -> LabeledDataset:
    """Subsample outliers so they make up at most a fraction ``xi`` of the rows."""
    if not 0.0 < xi <= 1.0:
        raise DatasetError("xi must lie in (0, 1]")
    n_out = data.n_outliers
    if n_out == 0:
        warnings.warn("dataset has no outliers; nothing to downsample", stacklevel=2)
        return data
    if xi == 1.0 or n_out / data.n <= xi:
        return data
    n_reg = data.n - n_out
    k = min(outlier_target(n_reg, xi), n_out)
    rng = np.random.default_rng(seed)
    out_rows = np.flatnonzero(data.labels)
    chosen = rng.choice(out_rows, size=k, replace=False)
    rows = np.sort(np.concatenate([np.flatnonzero(~data.labels), chosen]))
    return data.subset(rows, {"op": "downsample_outliers", "xi": xi, "seed": seed, "kept": k})
