"""Mean-based baselines."""

from __future__ import annotations

import numpy as np

from ..amputation import MaskedDataset
from .base import ImputationError, ImputedDataset, finish, require_donors


def mean_impute(md: MaskedDataset) -> ImputedDataset:
    """Fill each missing entry with the observed mean of its column."""
    require_donors(md)
    cols = list(range(md.observed.shape[1]))
    obs = md.observed
    means = np.nanmean(obs, axis=0)
    filled = np.broadcast_to(means, obs.shape)
    return finish(md, cols, filled, "mean")


def group_column_means(md: MaskedDataset):
    """Observed mean of every column within each sensitive group.

    Returns ``{group_value: (means, has_donor)}`` where ``has_donor`` flags
    columns with at least one observed entry in that group.
    """
    ds = md.dataset
    if ds.sensitive_col is None:
        raise ImputationError("group means need a sensitive column")
    out = {}
    a = ds.groups
    for g in np.unique(a):
        rows = a == g
        obs = md.observed[rows]
        seen = ~np.isnan(obs)
        count = seen.sum(axis=0)
        total = np.where(seen, obs, 0.0).sum(axis=0)
        means = np.divide(total, count, out=np.zeros_like(total), where=count > 0)
        out[float(g)] = (means, count > 0)
    return out


def group_mean_impute(md: MaskedDataset) -> ImputedDataset:
    """Fill each missing entry with its column's observed mean inside its own group."""
    ds = md.dataset
    means = group_column_means(md)
    a = ds.groups
    filled = np.zeros_like(md.observed)
    for g, (mu, has_donor) in means.items():
        rows = a == g
        needs = md.missing[rows].any(axis=0)
        bad = np.flatnonzero(needs & ~has_donor)
        if bad.size:
            names = [ds.column_names[j] for j in bad]
            raise ImputationError(f"no observed donors in group {g:g} for columns {names}")
        filled[rows] = mu
    return finish(md, list(range(ds.p)), filled, "group_mean")
