"""Missingness mechanisms and mask generation.

Eleven canonical mechanisms are available by label:

=====  ============  ===========================================
label  kind          probability that feature ``j`` is missing
=====  ============  ===========================================
1a     MCAR-const    0.1
1b     MCAR-const    0.5
1c     MCAR-const    0.9
2a     MAR-group     0.1 + 0.8 * 1[A = majority]
2b     MAR-group     0.1 + 0.8 * 1[A = minority]
2c     MAR-covariate 0.5 - 0.5 * z[L + j]
2d     MAR-covariate 0.5 + 0.5 * z[L + j]
3a     MNAR-self     0.5 - z[j]
3b     MNAR-self     0.5 - 0.2 * z[j]
3c     MNAR-self     0.5 + 0.2 * z[j]
3d     MNAR-self     0.5 + z[j]
=====  ============  ===========================================

Only the first ``L`` feature columns are amputated; probabilities are clipped to
``[0, 1]`` after evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset, DataError

MCAR = "MCAR-const"
MAR_GROUP = "MAR-group"
MAR_COVARIATE = "MAR-covariate"
MNAR_SELF = "MNAR-self"

# label -> (kind, intercept, slope, targeted group)
CANONICAL = {
    "1a": (MCAR, 0.1, 0.0, None),
    "1b": (MCAR, 0.5, 0.0, None),
    "1c": (MCAR, 0.9, 0.0, None),
    "2a": (MAR_GROUP, 0.1, 0.8, "majority"),
    "2b": (MAR_GROUP, 0.1, 0.8, "minority"),
    "2c": (MAR_COVARIATE, 0.5, -0.5, None),
    "2d": (MAR_COVARIATE, 0.5, 0.5, None),
    "3a": (MNAR_SELF, 0.5, -1.0, None),
    "3b": (MNAR_SELF, 0.5, -0.2, None),
    "3c": (MNAR_SELF, 0.5, 0.2, None),
    "3d": (MNAR_SELF, 0.5, 1.0, None),
}
LABELS = tuple(CANONICAL)

_CUSTOM_MCAR = re.compile(r"^mcar\(([0-9.eE+-]+)\)$")


@dataclass(frozen=True)
class MechanismSpec:
    kind: str
    intercept: float
    slope: float
    L: int
    label: str
    target_group: Optional[str] = None

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be a positive integer")
        if self.kind == MAR_GROUP and self.target_group not in ("majority", "minority"):
            raise ValueError("MAR-group mechanisms need target_group 'majority' or 'minority'")


def mechanism(label: str, L: int) -> MechanismSpec:
    """Build a spec from a canonical label, or ``mcar(p)`` for a constant rate ``p``."""
    if label in CANONICAL:
        kind, c0, c1, target = CANONICAL[label]
        return MechanismSpec(kind, c0, c1, L, label, target)
    m = _CUSTOM_MCAR.match(label)
    if m:
        p = float(m.group(1))
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"MCAR rate must lie in [0, 1], got {p}")
        return MechanismSpec(MCAR, p, 0.0, L, label)
    raise ValueError(f"unknown mechanism label {label!r}; expected one of {', '.join(LABELS)} or mcar(p)")


def check_compatible(ds: Dataset, spec: MechanismSpec) -> None:
    n_features = len(ds.feature_cols)
    if spec.L > n_features:
        raise DataError(f"L={spec.L} exceeds the {n_features} amputable feature columns")
    if spec.kind == MAR_COVARIATE and 2 * spec.L > n_features:
        raise DataError(
            f"mechanism {spec.label} conditions on feature L+j; needs 2L={2 * spec.L} "
            f"<= {n_features} feature columns"
        )
    if spec.kind == MAR_GROUP and ds.sensitive_col is None:
        raise DataError(f"mechanism {spec.label} requires a sensitive column")


def missing_probability(spec: MechanismSpec, row, j: int, in_majority: Optional[bool] = None) -> float:
    """Probability that feature ``j`` of a single sample is missing.

    ``row`` holds the sample's feature values in feature order (sensitive and
    response columns excluded). ``in_majority`` is required by MAR-group specs.
    """
    if not 0 <= j < spec.L:
        raise ValueError(f"feature index {j} outside the amputable range [0, {spec.L})")
    if spec.kind == MCAR:
        raw = spec.intercept
    elif spec.kind == MAR_GROUP:
        if in_majority is None:
            raise ValueError(f"mechanism {spec.label} needs the sample's group")
        hit = in_majority if spec.target_group == "majority" else not in_majority
        raw = spec.intercept + spec.slope * float(hit)
    elif spec.kind == MAR_COVARIATE:
        raw = spec.intercept + spec.slope * float(row[spec.L + j])
    else:
        raw = spec.intercept + spec.slope * float(row[j])
    return min(1.0, max(0.0, raw))


def missing_probabilities(ds: Dataset, spec: MechanismSpec) -> np.ndarray:
    """Vectorized :func:`missing_probability` over all rows: an n x L matrix."""
    check_compatible(ds, spec)
    feats = ds.values[:, ds.feature_cols]
    L = spec.L
    if spec.kind == MCAR:
        raw = np.full((ds.n, L), spec.intercept)
    elif spec.kind == MAR_GROUP:
        in_maj = ds.groups == ds.majority_value
        hit = in_maj if spec.target_group == "majority" else ~in_maj
        raw = np.repeat((spec.intercept + spec.slope * hit)[:, None], L, axis=1)
    elif spec.kind == MAR_COVARIATE:
        raw = spec.intercept + spec.slope * feats[:, L : 2 * L]
    else:
        raw = spec.intercept + spec.slope * feats[:, :L]
    return np.clip(raw, 0.0, 1.0)


@dataclass(frozen=True)
class MaskedDataset:
    """A dataset with some feature entries hidden.

    ``observed`` holds NaN where ``mask`` is 0. ``dataset`` keeps the complete
    matrix and its column roles; imputers only read its metadata.
    """

    observed: np.ndarray
    mask: np.ndarray
    dataset: Dataset
    source_spec: Optional[MechanismSpec] = None

    @property
    def truth(self) -> np.ndarray:
        return self.dataset.values

    @property
    def n(self) -> int:
        return self.observed.shape[0]

    @property
    def missing(self) -> np.ndarray:
        return self.mask == 0

    def regroup(self, col: int) -> "MaskedDataset":
        return MaskedDataset(self.observed, self.mask, self.dataset.regroup(col), self.source_spec)

    def take_rows(self, rows) -> "MaskedDataset":
        rows = np.asarray(rows, dtype=int)
        return MaskedDataset(
            self.observed[rows], self.mask[rows], self.dataset.take_rows(rows), self.source_spec
        )


def mask_dataset(ds: Dataset, mask, spec: Optional[MechanismSpec] = None) -> MaskedDataset:
    """Wrap an explicit 0/1 mask (1 = observed) around a complete dataset."""
    mask = np.asarray(mask).astype(np.int8)
    if mask.shape != ds.values.shape:
        raise DataError("mask shape does not match dataset")
    reserved = [j for j in range(ds.p) if j not in ds.feature_cols]
    if reserved and np.any(mask[:, reserved] == 0):
        raise DataError("sensitive and response columns must stay fully observed")
    observed = np.where(mask == 1, ds.values, np.nan)
    observed.setflags(write=False)
    mask.setflags(write=False)
    return MaskedDataset(observed, mask, ds, spec)


def ampute(ds: Dataset, spec: MechanismSpec, rng: np.random.Generator) -> MaskedDataset:
    """Hide entries of the first ``spec.L`` feature columns, independently per cell."""
    prob = missing_probabilities(ds, spec)
    hidden = rng.random(prob.shape) < prob
    mask = np.ones(ds.values.shape, dtype=np.int8)
    cols = ds.feature_cols[: spec.L]
    mask[:, cols] = np.where(hidden, 0, 1)
    return mask_dataset(ds, mask, spec)
