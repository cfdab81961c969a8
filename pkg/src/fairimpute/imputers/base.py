from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..amputation import MaskedDataset


class ImputationError(ValueError):
    """An imputer cannot run on the given masked dataset."""


@dataclass
class ImputedDataset:
    """Completed matrix plus provenance.

    ``filled_mask`` is 1 where a value was imputed. ``diagnostics`` holds optional
    per-iteration traces (objective values, change norms) for methods that
    record them.
    """

    values: np.ndarray
    filled_mask: np.ndarray
    method_name: str
    iterations_used: int = 0
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)


def working_columns(md: MaskedDataset, use_sensitive: bool = True) -> list:
    """Columns an imputer may read: the features, plus sensitive columns if allowed."""
    cols = list(md.dataset.feature_cols)
    if use_sensitive:
        cols += [c for c, _ in md.dataset.group_columns]
    return sorted(cols)


def amputed_columns(md: MaskedDataset, cols) -> list:
    """Positions within ``cols`` that have at least one missing entry."""
    miss = md.missing[:, cols]
    return [k for k in range(len(cols)) if miss[:, k].any()]


def require_donors(md: MaskedDataset) -> None:
    miss = md.missing
    full = np.flatnonzero(miss.all(axis=0))
    if full.size:
        names = [md.dataset.column_names[j] for j in full]
        raise ImputationError(f"columns entirely missing: {names}")


def column_means(md: MaskedDataset, cols) -> np.ndarray:
    obs = md.observed[:, cols]
    return np.array([np.mean(obs[~np.isnan(obs[:, k]), k]) if (~np.isnan(obs[:, k])).any() else 0.0
                     for k in range(len(cols))])


def finish(md: MaskedDataset, cols, filled: np.ndarray, name: str, **extra) -> ImputedDataset:
    """Assemble the full completed matrix, keeping observed entries verbatim."""
    values = np.array(md.observed, dtype=float)
    sub = values[:, cols]
    miss = np.isnan(sub)
    sub[miss] = filled[miss]
    values[:, cols] = sub
    if np.isnan(values).any():
        raise ImputationError(f"{name}: missing entries outside the imputed columns")
    if not np.all(np.isfinite(values)):
        raise ImputationError(f"{name}: produced non-finite values")
    return ImputedDataset(values, (1 - md.mask).astype(np.int8), name, **extra)
