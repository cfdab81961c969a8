"""Imputation methods behind a common name-based entry point."""

from __future__ import annotations

import inspect
from typing import Optional

import numpy as np

from ..amputation import MaskedDataset
from .base import ImputationError, ImputedDataset
from .chained import forest_impute, mice_impute
from .knn import knn_impute
from .lowrank import optspace_impute, soft_impute
from .simple import group_mean_impute, mean_impute

IMPUTERS = {
    "mean": mean_impute,
    "group_mean": group_mean_impute,
    "knn": knn_impute,
    "mice": mice_impute,
    "missforest": forest_impute,
    "softimpute": soft_impute,
    "optspace": optspace_impute,
}


def imputer_parameters(name: str) -> dict:
    """Configurable keyword parameters of an imputer and their defaults."""
    if name not in IMPUTERS:
        raise ValueError(f"unknown imputer {name!r}; choose from {', '.join(IMPUTERS)}")
    sig = inspect.signature(IMPUTERS[name])
    return {k: v.default for k, v in sig.parameters.items() if k not in ("md", "rng")}


def impute(md: MaskedDataset, method: str, config: Optional[dict] = None,
           rng: Optional[np.random.Generator] = None, use_sensitive: bool = True) -> ImputedDataset:
    """Run the imputer registered under ``method``.

    ``config`` supplies keyword hyperparameters; unknown keys raise ``ValueError``.
    ``use_sensitive`` is forwarded to methods that can read the sensitive columns.
    """
    params = imputer_parameters(method)
    config = dict(config or {})
    unknown = set(config) - set(params)
    if unknown:
        raise ValueError(f"unknown parameters for {method}: {sorted(unknown)}")
    if "use_sensitive" in params:
        config.setdefault("use_sensitive", use_sensitive)
    fn = IMPUTERS[method]
    if "rng" in inspect.signature(fn).parameters:
        config["rng"] = rng
    return fn(md, **config)


__all__ = [
    "IMPUTERS",
    "ImputationError",
    "ImputedDataset",
    "forest_impute",
    "group_mean_impute",
    "impute",
    "imputer_parameters",
    "knn_impute",
    "mean_impute",
    "mice_impute",
    "optspace_impute",
    "soft_impute",
]
