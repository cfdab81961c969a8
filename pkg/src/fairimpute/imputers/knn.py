"""K-nearest-neighbour imputation with co-observed distances."""

from __future__ import annotations

import numpy as np

from ..amputation import MaskedDataset
from .base import ImputedDataset, amputed_columns, column_means, finish, require_donors, working_columns

_BLOCK = 256


def co_observed_distances(values: np.ndarray, seen: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """RMS distance over co-observed coordinates between ``rows`` and every row.

    Pairs that share no observed coordinate get ``inf``.
    """
    out = np.empty((len(rows), values.shape[0]))
    v = np.where(seen, values, 0.0)
    for start in range(0, len(rows), _BLOCK):
        r = rows[start : start + _BLOCK]
        both = seen[r][:, None, :] & seen[None, :, :]
        diff = np.where(both, v[r][:, None, :] - v[None, :, :], 0.0)
        count = both.sum(axis=2)
        ssq = np.einsum("abk,abk->ab", diff, diff)
        with np.errstate(divide="ignore", invalid="ignore"):
            out[start : start + len(r)] = np.where(count > 0, np.sqrt(ssq / np.maximum(count, 1)), np.inf)
    return out


def knn_impute(md: MaskedDataset, k: int = 5, use_sensitive: bool = True) -> ImputedDataset:
    """Impute each gap with the mean of the ``k`` nearest rows observing that column.

    Distances use only coordinates observed in both rows. Ties go to the smaller
    row index; rows with no finite-distance donor fall back to the column mean.
    """
    if k < 1:
        raise ValueError("k must be positive")
    require_donors(md)
    cols = working_columns(md, use_sensitive)
    values = md.observed[:, cols]
    seen = ~np.isnan(values)
    filled = np.where(seen, values, 0.0)
    targets = amputed_columns(md, cols)
    if not targets:
        return finish(md, cols, filled, "knn")

    means = column_means(md, cols)
    rows = np.flatnonzero((~seen).any(axis=1))
    dist = co_observed_distances(values, seen, rows)
    fallbacks = 0
    for a, i in enumerate(rows):
        d_i = dist[a]
        for c in np.flatnonzero(~seen[i]):
            donors = np.flatnonzero(seen[:, c] & np.isfinite(d_i))
            if donors.size == 0:
                filled[i, c] = means[c]
                fallbacks += 1
                continue
            order = np.argsort(d_i[donors], kind="stable")[:k]
            filled[i, c] = values[donors[order], c].mean()
    return finish(md, cols, filled, "knn", diagnostics={"mean_fallbacks": fallbacks})
