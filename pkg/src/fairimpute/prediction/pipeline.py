"""Downstream prediction experiment: complete data vs complete cases vs imputed data."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..amputation import MaskedDataset, MechanismSpec, ampute
from ..data import DataError, Dataset, split_indices
from ..imputers import impute
from ..metrics import STANDARD, eod, red
from .forest import CLASSIFICATION, REGRESSION, ForestConfig, fit_forest, predict_forest

COMPLETE_DATA = "complete_data"
COMPLETE_CASES = "complete_cases"
IMPUTED = "imputed"


@dataclass
class PredictionReport:
    """Test-set metrics for one imputer, keyed ``metrics[source][grouping]``.

    A source that could not be evaluated has no entry in ``metrics`` and a
    message in ``failures`` instead.
    """

    imputer_name: str
    mechanism_label: str
    task: str
    complete_case_count: int
    metrics: dict = field(default_factory=dict)
    failures: dict = field(default_factory=dict)


def infer_task(ds: Dataset) -> str:
    if ds.response_col is None:
        raise DataError("dataset has no response column")
    y = ds.values[:, ds.response_col]
    return CLASSIFICATION if set(np.unique(y)) <= {0.0, 1.0} else REGRESSION


def predictor_columns(ds: Dataset, use_sensitive: bool) -> list:
    cols = list(ds.feature_cols)
    if use_sensitive:
        cols += [c for c, _ in ds.group_columns]
    return sorted(cols)


def _evaluate(ds: Dataset, test: np.ndarray, y_pred: np.ndarray, task: str, fpr_mode: str) -> dict:
    y = ds.values[test, ds.response_col]
    out = {}
    for col, maj in ds.group_columns:
        groups = ds.values[test, col]
        name = ds.column_names[col]
        if task == CLASSIFICATION:
            out[name] = eod(y, y_pred, groups, maj, fpr_mode)
        else:
            out[name] = red(y, y_pred, groups, maj)
    return out


def run_prediction_trial(ds: Dataset, spec: MechanismSpec, imputers: dict, *, split_seed: int,
                         ampute_seed: int, forest_seed: int, imputer_seeds: dict,
                         train_fraction: float = 0.8, forest: Optional[ForestConfig] = None,
                         task: Optional[str] = None, use_sensitive_in_imputation: bool = True,
                         use_sensitive_in_prediction: bool = True, fpr_mode: str = STANDARD) -> dict:
    """One split, one amputation, every imputer in ``imputers`` (name -> config).

    The complete-data and complete-case arms are fitted once and shared by all
    reports. All three arms use the same forest seed, so identical training
    data gives identical models. Returns ``{imputer_name: PredictionReport}``.
    """
    task = task or infer_task(ds)
    if not ds.group_columns:
        raise DataError("prediction metrics need a sensitive column")
    train_idx, test_idx = split_indices(ds.n, train_fraction, np.random.default_rng(split_seed))
    assert not np.intersect1d(train_idx, test_idx).size
    train = ds.take_rows(train_idx)
    md = ampute(train, spec, np.random.default_rng(ampute_seed))
    pcols = predictor_columns(ds, use_sensitive_in_prediction)
    X_test = ds.values[test_idx][:, pcols]
    y_train = train.values[:, ds.response_col]

    def arm(X_train, y_fit):
        model = fit_forest(X_train, y_fit, task, forest, np.random.default_rng(forest_seed))
        return _evaluate(ds, test_idx, predict_forest(model, X_test), task, fpr_mode)

    shared, shared_fail = {}, {}
    try:
        shared[COMPLETE_DATA] = arm(train.values[:, pcols], y_train)
    except (ValueError, ArithmeticError) as exc:
        shared_fail[COMPLETE_DATA] = str(exc)
    complete_rows = np.flatnonzero(md.mask.all(axis=1))
    try:
        if complete_rows.size == 0:
            raise ValueError("no complete cases in the training split")
        shared[COMPLETE_CASES] = arm(train.values[complete_rows][:, pcols], y_train[complete_rows])
    except (ValueError, ArithmeticError) as exc:
        shared_fail[COMPLETE_CASES] = str(exc)

    reports = {}
    for name, config in imputers.items():
        report = PredictionReport(name, spec.label, task, int(complete_rows.size),
                                  dict(shared), dict(shared_fail))
        try:
            completed = impute(md, name, config, np.random.default_rng(imputer_seeds[name]),
                               use_sensitive_in_imputation)
            report.metrics[IMPUTED] = arm(completed.values[:, pcols], y_train)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            report.failures[IMPUTED] = str(exc)
        reports[name] = report
    return reports


def run_prediction_pipeline(ds: Dataset, spec: MechanismSpec, imputer: str,
                            config: Optional[dict] = None, rng: Optional[np.random.Generator] = None,
                            **options) -> PredictionReport:
    """Split 80/20, ampute the training part, impute it, and compare three forests.

    Forests are trained on the original training rows, on its complete cases,
    and on the imputed training rows, then scored on the untouched test rows.
    ``options`` are forwarded to :func:`run_prediction_trial`.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    split_seed, ampute_seed, forest_seed, imputer_seed = (int(s) for s in rng.integers(0, 2**63 - 1, 4))
    return run_prediction_trial(
        ds, spec, {imputer: config or {}}, split_seed=split_seed, ampute_seed=ampute_seed,
        forest_seed=forest_seed, imputer_seeds={imputer: imputer_seed}, **options,
    )[imputer]


def masked_training_split(ds: Dataset, spec: MechanismSpec, train_fraction: float,
                          split_seed: int, ampute_seed: int) -> tuple:
    """Training-split amputation exactly as done by :func:`run_prediction_trial`."""
    train_idx, test_idx = split_indices(ds.n, train_fraction, np.random.default_rng(split_seed))
    md: MaskedDataset = ampute(ds.take_rows(train_idx), spec, np.random.default_rng(ampute_seed))
    return md, train_idx, test_idx
