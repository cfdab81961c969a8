"""Dataset container, CSV ingestion, normalization and row partitioning."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class DataError(ValueError):
    """Raised for malformed input data or invalid dataset operations."""


@dataclass(frozen=True)
class Dataset:
    """A complete numeric data matrix with column roles.

    Parameters
    ----------
    values : np.ndarray
        n x p matrix, rows are samples.
    column_names : tuple of str
        One name per column.
    sensitive_col : int, optional
        Column holding the binary sensitive attribute used for group metrics.
    majority_value : float
        Value of the sensitive column that labels the majority group.
    response_col : int, optional
        Column holding the outcome.
    extra_sensitive : tuple of (int, float)
        Further binary sensitive columns as ``(column, majority_value)``. They are
        never amputated or normalized and can be promoted with :meth:`regroup`.
    """

    values: np.ndarray
    column_names: tuple
    sensitive_col: Optional[int] = None
    majority_value: float = 1.0
    response_col: Optional[int] = None
    extra_sensitive: tuple = field(default_factory=tuple)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise DataError("values must be a 2-d matrix")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        object.__setattr__(self, "extra_sensitive", tuple(tuple(e) for e in self.extra_sensitive))
        if len(self.column_names) != values.shape[1]:
            raise DataError("column_names length does not match column count")
        if len(set(self.column_names)) != len(self.column_names):
            raise DataError("duplicate column names")
        if not np.all(np.isfinite(values)):
            raise DataError("dataset entries must all be finite")
        if self.sensitive_col is not None and self.sensitive_col == self.response_col:
            raise DataError("sensitive and response columns must differ")
        for col, _ in self.group_columns:
            if not 0 <= col < values.shape[1]:
                raise DataError(f"sensitive column index {col} out of range")
            if len(np.unique(values[:, col])) > 2:
                raise DataError(f"sensitive column {self.column_names[col]!r} is not binary")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def group_columns(self) -> list:
        """All sensitive columns as ``(column, majority_value)`` pairs, primary first."""
        cols = [] if self.sensitive_col is None else [(self.sensitive_col, self.majority_value)]
        return cols + [tuple(e) for e in self.extra_sensitive]

    @property
    def feature_cols(self) -> list:
        """Indices of the predictor columns eligible for amputation, in column order."""
        reserved = {c for c, _ in self.group_columns}
        if self.response_col is not None:
            reserved.add(self.response_col)
        return [j for j in range(self.p) if j not in reserved]

    @property
    def groups(self) -> Optional[np.ndarray]:
        """Sensitive attribute vector of the primary grouping."""
        if self.sensitive_col is None:
            return None
        return self.values[:, self.sensitive_col]

    def regroup(self, col: int) -> "Dataset":
        """Return a view of the same data with ``col`` as the primary sensitive column."""
        pairs = dict(self.group_columns)
        if col not in pairs:
            raise DataError(f"column {col} is not a sensitive column")
        extra = tuple((c, m) for c, m in self.group_columns if c != col)
        return replace(self, sensitive_col=col, majority_value=pairs[col], extra_sensitive=extra)

    def take_rows(self, rows) -> "Dataset":
        return replace(self, values=self.values[np.asarray(rows, dtype=int)])

    def with_values(self, values: np.ndarray) -> "Dataset":
        return replace(self, values=values)


@dataclass(frozen=True)
class GroupView:
    """Rows whose sensitive attribute equals ``group_value``."""

    group_value: float
    row_indices: np.ndarray


@dataclass
class Schema:
    """Column-role assignment used when reading a CSV file.

    ``sensitive`` lists sensitive column names, primary first; ``majority`` gives
    the raw majority label for each (``None`` picks the more frequent value).
    """

    sensitive: Sequence[str] = ()
    majority: Sequence[Optional[str]] = ()
    response: Optional[str] = None


def _code_sensitive(raw: list, majority: Optional[str], name: str) -> tuple:
    levels = sorted(set(raw))
    if len(levels) != 2:
        raise DataError(
            f"sensitive column {name!r} must have exactly 2 distinct values, found {len(levels)}"
        )
    try:
        numeric = sorted(float(v) for v in levels)
    except ValueError:
        numeric = None
    if numeric == [0.0, 1.0]:
        # already 0/1 coded: keep the codes, record which one is the majority
        codes = np.array([float(v) for v in raw])
        if majority is None:
            maj = 1.0 if np.sum(codes == 1.0) >= np.sum(codes == 0.0) else 0.0
        else:
            maj = float(majority)
            if maj not in (0.0, 1.0):
                raise DataError(f"majority value {majority!r} not present in column {name!r}")
        return codes, maj
    if majority is None:
        counts = {v: raw.count(v) for v in levels}
        majority = max(levels, key=lambda v: counts[v])
    if majority not in levels:
        raise DataError(f"majority value {majority!r} not present in column {name!r}")
    return np.array([1.0 if v == majority else 0.0 for v in raw]), 1.0


def load_csv(path, schema: Optional[Schema] = None, *, missing_token: Optional[str] = None):
    """Read a comma-separated file with a header row into a :class:`Dataset`.

    Sensitive columns may hold arbitrary labels; they are recoded to 0/1 with the
    majority mapped to 1 (columns already coded 0/1 keep their codes). Every other
    cell must parse as a finite float. All unparseable cells are collected and
    reported together.

    When ``missing_token`` is given, cells equal to it are read as NaN and the
    function returns ``(dataset_template, observed, mask)`` instead, where the
    template holds zeros in the missing cells.
    """
    schema = schema or Schema()
    path = Path(path)
    if not path.is_file():
        raise DataError(f"file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise DataError(f"{path}: duplicate column names {dupes}")
    for name in list(schema.sensitive) + ([schema.response] if schema.response else []):
        if name not in header:
            raise DataError(f"{path}: declared column {name!r} not in header")
    sens_idx = [header.index(s) for s in schema.sensitive]
    majority = list(schema.majority) + [None] * (len(sens_idx) - len(schema.majority))

    n, p = len(body), len(header)
    values = np.zeros((n, p))
    mask = np.ones((n, p), dtype=bool)
    problems = []
    for i, row in enumerate(body):
        if len(row) != p:
            problems.append(f"row {i + 1}: expected {p} cells, found {len(row)}")
            continue
        for j, cell in enumerate(row):
            if j in sens_idx:
                continue
            cell = cell.strip()
            if missing_token is not None and cell == missing_token:
                mask[i, j] = False
                continue
            try:
                v = float(cell)
            except ValueError:
                v = math.nan
            if not math.isfinite(v):
                problems.append(f"row {i + 1}, column {header[j]!r}: cannot parse {cell!r}")
            else:
                values[i, j] = v
    if problems:
        shown = "; ".join(problems[:20])
        more = f" (and {len(problems) - 20} more)" if len(problems) > 20 else ""
        raise DataError(f"{path}: {shown}{more}")

    coded = []
    for col, maj in zip(sens_idx, majority):
        raw = [row[col].strip() for row in body]
        if "" in raw or (missing_token is not None and missing_token in raw):
            raise DataError(f"{path}: sensitive column {header[col]!r} has empty cells")
        values[:, col], maj_code = _code_sensitive(raw, maj, header[col])
        coded.append((col, maj_code))

    ds = Dataset(
        values,
        header,
        sensitive_col=coded[0][0] if coded else None,
        majority_value=coded[0][1] if coded else 1.0,
        response_col=header.index(schema.response) if schema.response else None,
        extra_sensitive=tuple(coded[1:]),
    )
    if missing_token is None:
        return ds
    observed = np.where(mask, values, np.nan)
    return ds, observed, mask.astype(np.int8)


def write_csv(path, column_names, values, *, missing_token: str = "NA", fmt: str = "%.17g"):
    """Write a matrix with a header row; NaN cells become ``missing_token``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(column_names)
        for row in np.asarray(values):
            writer.writerow([missing_token if np.isnan(v) else fmt % v for v in row])


def normalize_columns(ds: Dataset) -> Dataset:
    """Standardize each feature column to mean 0 and population sd 1.

    Constant columns become all zeros. Sensitive and response columns are left on
    their raw scale.
    """
    values = np.array(ds.values, dtype=float)
    for j in ds.feature_cols:
        col = values[:, j]
        mean = col.mean()
        sd = col.std()
        if sd < 1e-12 * max(1.0, abs(mean)):
            values[:, j] = 0.0
        else:
            values[:, j] = (col - mean) / sd
    return ds.with_values(values)


def split_indices(n: int, train_fraction: float, rng: np.random.Generator):
    """Random train/test row indices, each sorted ascending."""
    if not 0.0 < train_fraction < 1.0:
        raise DataError("train_fraction must lie in (0, 1)")
    n_train = int(math.floor(train_fraction * n))
    if n_train < 1 or n_train >= n:
        raise DataError(f"train_fraction {train_fraction} leaves an empty part for n={n}")
    perm = rng.permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split_train_test(ds: Dataset, train_fraction: float, rng: np.random.Generator):
    """Split rows uniformly at random into (train, test) datasets."""
    train, test = split_indices(ds.n, train_fraction, rng)
    return ds.take_rows(train), ds.take_rows(test)


def group_partition(ds: Dataset):
    """Return ``(majority, minority)`` views over the primary sensitive column."""
    if ds.sensitive_col is None:
        raise DataError("dataset has no sensitive column")
    a = ds.groups
    maj = np.flatnonzero(a == ds.majority_value)
    mino = np.flatnonzero(a != ds.majority_value)
    if maj.size == 0:
        raise DataError("empty majority group")
    if mino.size == 0:
        raise DataError("empty minority group")
    other = a[mino[0]]
    return GroupView(ds.majority_value, maj), GroupView(float(other), mino)
