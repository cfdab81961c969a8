"""Repeated imputation and prediction benchmarks over a mechanism x method grid."""

from __future__ import annotations

import logging

import numpy as np

from ..amputation import ampute, mechanism
from ..data import Dataset, group_partition, load_csv, normalize_columns
from ..imputers import impute
from ..metrics import iapd, msie, variance_baselines
from ..prediction.forest import CLASSIFICATION
from ..prediction.pipeline import COMPLETE_CASES, COMPLETE_DATA, IMPUTED, infer_task, run_prediction_trial
from .config import ExperimentConfig
from .report import Report, aggregate
from .seeding import derive_seed, stream
from .synthetic import generate_synthetic

log = logging.getLogger(__name__)

BASELINE = "baseline"
CC = "CC"
COMPLETE = "complete"

# errors that mark a cell as failed instead of aborting the run
CELL_ERRORS = (ValueError, ArithmeticError, np.linalg.LinAlgError)


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    if cfg.synthetic is not None:
        return generate_synthetic(cfg.synthetic)
    ds = load_csv(cfg.dataset_path, cfg.schema)
    return normalize_columns(ds) if cfg.normalize else ds


def groupings(ds: Dataset) -> list:
    """``(suffix, column)`` for every sensitive column, primary first."""
    return [(ds.column_names[c], c) for c, _ in ds.group_columns]


class _Grid:
    """Per-repeat value lists keyed by (mechanism, method, metric), in grid order."""

    def __init__(self, repeats: int):
        self.repeats = repeats
        self.cells: dict = {}

    def declare(self, key):
        self.cells.setdefault(key, [None] * self.repeats)

    def put(self, key, r: int, value):
        self.declare(key)
        self.cells[key][r] = None if value is None else float(value)


def run_imputation_benchmark(cfg: ExperimentConfig, ds: Dataset = None) -> Report:
    """Imputation study: MSIE and IAPD per imputer, Var and VarD baselines."""
    ds = ds if ds is not None else load_dataset(cfg)
    groups = groupings(ds)
    if not groups:
        raise ValueError("the imputation benchmark needs a sensitive column")
    grid = _Grid(cfg.repeats)
    for label in cfg.mechanisms:
        grid.declare((label, BASELINE, "Var"))
        for g, _ in groups:
            grid.declare((label, BASELINE, f"VarD_{g}"))
        for name in cfg.imputers:
            grid.declare((label, name, "MSIE"))
            for g, _ in groups:
                grid.declare((label, name, f"IAPD_{g}"))

    for r in range(cfg.repeats):
        for label in cfg.mechanisms:
            spec = mechanism(label, cfg.L)
            try:
                md = ampute(ds, spec, stream(cfg.master_seed, r, label, "ampute"))
            except CELL_ERRORS as exc:
                log.warning("repeat %d, mechanism %s: amputation failed: %s", r, label, exc)
                continue
            for k, (g, col) in enumerate(groups):
                try:
                    view = md.regroup(col)
                    var, vard = variance_baselines(view, *group_partition(view.dataset))
                except CELL_ERRORS as exc:
                    log.warning("repeat %d, %s: baseline for %s failed: %s", r, label, g, exc)
                    continue
                if k == 0:
                    grid.put((label, BASELINE, "Var"), r, var)
                grid.put((label, BASELINE, f"VarD_{g}"), r, vard)
            for name, params in cfg.imputers.items():
                try:
                    completed = impute(md, name, params, stream(cfg.master_seed, r, label, name),
                                       cfg.use_sensitive_in_imputation)
                    grid.put((label, name, "MSIE"), r, msie(completed, md))
                except CELL_ERRORS as exc:
                    log.warning("repeat %d, %s, %s failed: %s", r, label, name, exc)
                    continue
                for g, col in groups:
                    try:
                        view = md.regroup(col)
                        value = iapd(completed, view, *group_partition(view.dataset))
                    except CELL_ERRORS as exc:
                        log.warning("repeat %d, %s, %s: IAPD_%s failed: %s", r, label, name, g, exc)
                        continue
                    grid.put((label, name, f"IAPD_{g}"), r, value)
    return Report("Imputation fairness", aggregate(grid.cells, cfg.repeats))


def _prediction_metrics(metrics: dict, task: str) -> dict:
    out = {}
    first = next(iter(metrics.values()))
    if task == CLASSIFICATION:
        out["accuracy"] = first.accuracy
        for g, m in metrics.items():
            out[f"EOD_{g}"] = m.eod
            out[f"acc_diff_{g}"] = m.acc_diff
    else:
        out["mse"] = first.mse
        for g, m in metrics.items():
            out[f"RED_{g}"] = m.red
    return out


def run_prediction_benchmark(cfg: ExperimentConfig, ds: Dataset = None) -> Report:
    """Prediction study: forests trained on complete, complete-case and imputed data."""
    ds = ds if ds is not None else load_dataset(cfg)
    task = infer_task(ds)
    groups = groupings(ds)
    if not groups:
        raise ValueError("the prediction benchmark needs a sensitive column")
    if task == CLASSIFICATION:
        names = ["accuracy"] + [f"{m}_{g}" for g, _ in groups for m in ("EOD", "acc_diff")]
    else:
        names = ["mse"] + [f"RED_{g}" for g, _ in groups]
    methods = list(cfg.imputers) + [CC, COMPLETE]
    grid = _Grid(cfg.repeats)
    for label in cfg.mechanisms:
        for method in methods:
            for metric in names:
                grid.declare((label, method, metric))

    for r in range(cfg.repeats):
        split_seed = derive_seed(cfg.master_seed, r, "split")
        forest_seed = derive_seed(cfg.master_seed, r, "forest")
        for label in cfg.mechanisms:
            spec = mechanism(label, cfg.L)
            try:
                reports = run_prediction_trial(
                    ds, spec, cfg.imputers,
                    split_seed=split_seed,
                    ampute_seed=derive_seed(cfg.master_seed, r, label, "ampute"),
                    forest_seed=forest_seed,
                    imputer_seeds={n: derive_seed(cfg.master_seed, r, label, n) for n in cfg.imputers},
                    train_fraction=cfg.train_fraction, forest=cfg.forest, task=task,
                    use_sensitive_in_imputation=cfg.use_sensitive_in_imputation,
                    use_sensitive_in_prediction=cfg.use_sensitive_in_prediction,
                    fpr_mode=cfg.fpr_mode,
                )
            except CELL_ERRORS as exc:
                log.warning("repeat %d, mechanism %s failed: %s", r, label, exc)
                continue
            any_report = next(iter(reports.values()))
            arms = [(name, rep, IMPUTED) for name, rep in reports.items()]
            arms += [(CC, any_report, COMPLETE_CASES), (COMPLETE, any_report, COMPLETE_DATA)]
            for method, rep, source in arms:
                if source not in rep.metrics:
                    log.warning("repeat %d, %s, %s failed: %s", r, label, method, rep.failures.get(source))
                    continue
                for metric, value in _prediction_metrics(rep.metrics[source], task).items():
                    grid.put((label, method, metric), r, value)
    return Report("Prediction fairness", aggregate(grid.cells, cfg.repeats))
