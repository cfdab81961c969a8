"""Imputation and prediction fairness metrics.

Every group difference is reported as majority minus minority.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .amputation import MaskedDataset
from .data import GroupView, group_partition
from .imputers.base import ImputedDataset
from .imputers.simple import group_column_means


class MetricError(ValueError):
    """A metric is undefined for the given inputs."""


STANDARD = "standard"
LITERAL = "literal"


@dataclass(frozen=True)
class ImputationMetrics:
    msie_overall: float
    msie_majority: float
    msie_minority: float
    iapd: float
    var_overall: float
    vard: float
    n_missing_majority: int
    n_missing_minority: int


@dataclass(frozen=True)
class ClassificationMetrics:
    accuracy: float
    acc_majority: float
    acc_minority: float
    fpr_majority: float
    fpr_minority: float
    fnr_majority: float
    fnr_minority: float
    eod: float

    @property
    def acc_diff(self) -> float:
        return self.acc_majority - self.acc_minority


@dataclass(frozen=True)
class RegressionMetrics:
    mse: float
    mse_majority: float
    mse_minority: float
    red: float


def _rows(md: MaskedDataset, group: Optional[GroupView]) -> np.ndarray:
    return np.arange(md.n) if group is None else np.asarray(group.row_indices)


def squared_errors(imputed: ImputedDataset, md: MaskedDataset, group: Optional[GroupView] = None):
    """Squared imputation errors at the missing entries of ``group``'s rows."""
    rows = _rows(md, group)
    miss = md.missing[rows]
    diff = imputed.values[rows] - md.truth[rows]
    return diff[miss] ** 2


def msie(imputed: ImputedDataset, md: MaskedDataset, group: Optional[GroupView] = None) -> float:
    """Mean squared imputation error over the missing entries in ``group`` (all rows if None)."""
    errs = squared_errors(imputed, md, group)
    if errs.size == 0:
        raise MetricError("group has no missing entries")
    return float(errs.mean())


def iapd(imputed: ImputedDataset, md: MaskedDataset, maj: GroupView, mino: GroupView) -> float:
    """Imputation accuracy parity difference: MSIE(majority) - MSIE(minority)."""
    return msie(imputed, md, maj) - msie(imputed, md, mino)


def _baseline_errors(md: MaskedDataset, group: GroupView, means: dict) -> np.ndarray:
    mu, has_donor = means[float(group.group_value)]
    rows = np.asarray(group.row_indices)
    miss = md.missing[rows]
    if np.any(miss.any(axis=0) & ~has_donor):
        raise MetricError(f"group {group.group_value:g} has a column with missing entries but no observed donors")
    return ((md.truth[rows] - mu) ** 2)[miss]


def variance_baselines(md: MaskedDataset, maj: GroupView, mino: GroupView):
    """Deviation of missing truths from observed group/column means.

    Returns ``(var, vard)``: the pooled mean squared deviation over all missing
    entries, and the majority-minus-minority difference of the per-group values.
    """
    means = group_column_means(md)
    e_maj = _baseline_errors(md, maj, means)
    e_min = _baseline_errors(md, mino, means)
    if e_maj.size == 0 or e_min.size == 0:
        raise MetricError("both groups need missing entries")
    var = float(np.concatenate([e_maj, e_min]).mean())
    return var, float(e_maj.mean() - e_min.mean())


def imputation_metrics(imputed: ImputedDataset, md: MaskedDataset) -> ImputationMetrics:
    """All imputation metrics for the primary sensitive grouping of ``md``."""
    maj, mino = group_partition(md.dataset)
    e_maj = squared_errors(imputed, md, maj)
    e_min = squared_errors(imputed, md, mino)
    if e_maj.size == 0 or e_min.size == 0:
        raise MetricError("both groups need missing entries")
    var, vard = variance_baselines(md, maj, mino)
    m_maj, m_min = float(e_maj.mean()), float(e_min.mean())
    return ImputationMetrics(
        msie_overall=float(np.concatenate([e_maj, e_min]).mean()),
        msie_majority=m_maj,
        msie_minority=m_min,
        iapd=m_maj - m_min,
        var_overall=var,
        vard=vard,
        n_missing_majority=int(e_maj.size),
        n_missing_minority=int(e_min.size),
    )


def _split_groups(groups, majority_value):
    groups = np.asarray(groups)
    maj = groups == majority_value
    if not maj.any() or maj.all():
        raise MetricError("both sensitive groups must be non-empty")
    return maj, ~maj


def _rates(y, yhat, mode):
    neg = y == 0
    pos = y == 1
    if not neg.any() or not pos.any():
        raise MetricError("each group needs both a positive and a negative true label")
    if mode == STANDARD:
        fpr = np.sum(neg & (yhat == 1)) / np.sum(neg)
        fnr = np.sum(pos & (yhat == 0)) / np.sum(pos)
    else:
        # numerators count every positive (negative) prediction in the group
        fpr = np.sum(yhat == 1) / np.sum(neg)
        fnr = np.sum(yhat == 0) / np.sum(pos)
    return float(fpr), float(fnr)


def eod(y_true, y_pred, groups, majority_value: float = 1.0, mode: str = STANDARD) -> ClassificationMetrics:
    """Equalized odds difference ``|dFPR| + |dFNR|`` plus accuracy figures.

    ``mode="literal"`` uses numerators that are not conditioned on the true
    label; it is kept for comparison and can exceed the [0, 2] range.
    """
    if mode not in (STANDARD, LITERAL):
        raise ValueError(f"unknown mode {mode!r}")
    y = np.asarray(y_true)
    yhat = np.asarray(y_pred)
    if y.shape != yhat.shape or y.shape != np.shape(groups):
        raise MetricError("y_true, y_pred and groups must have the same length")
    if not (np.isin(y, (0, 1)).all() and np.isin(yhat, (0, 1)).all()):
        raise MetricError("labels must be binary 0/1")
    maj, mino = _split_groups(groups, majority_value)
    fpr_maj, fnr_maj = _rates(y[maj], yhat[maj], mode)
    fpr_min, fnr_min = _rates(y[mino], yhat[mino], mode)
    hit = y == yhat
    return ClassificationMetrics(
        accuracy=float(hit.mean()),
        acc_majority=float(hit[maj].mean()),
        acc_minority=float(hit[mino].mean()),
        fpr_majority=fpr_maj,
        fpr_minority=fpr_min,
        fnr_majority=fnr_maj,
        fnr_minority=fnr_min,
        eod=abs(fpr_maj - fpr_min) + abs(fnr_maj - fnr_min),
    )


def red(y_true, y_pred, groups, majority_value: float = 1.0) -> RegressionMetrics:
    """Regression error difference: MSE(majority) - MSE(minority)."""
    y = np.asarray(y_true, dtype=float)
    yhat = np.asarray(y_pred, dtype=float)
    if y.shape != yhat.shape or y.shape != np.shape(groups):
        raise MetricError("y_true, y_pred and groups must have the same length")
    maj, mino = _split_groups(groups, majority_value)
    sq = (y - yhat) ** 2
    mse_maj, mse_min = float(sq[maj].mean()), float(sq[mino].mean())
    return RegressionMetrics(float(sq.mean()), mse_maj, mse_min, mse_maj - mse_min)
