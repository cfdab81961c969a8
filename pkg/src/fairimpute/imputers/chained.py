"""Iterative column-by-column imputers: chained ridge regressions and missForest."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..amputation import MaskedDataset
from ..prediction.forest import REGRESSION, ForestConfig, fit_forest, predict_forest
from .base import ImputedDataset, amputed_columns, column_means, finish, require_donors, working_columns


def _initial_fill(md: MaskedDataset, cols):
    values = np.array(md.observed[:, cols], dtype=float)
    miss = np.isnan(values)
    values[miss] = np.broadcast_to(column_means(md, cols), values.shape)[miss]
    return values, miss


def ridge_fit(X: np.ndarray, y: np.ndarray, ridge: float):
    """Ridge regression with an unpenalized intercept; returns (intercept, coef)."""
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    gram = Xc.T @ Xc + ridge * np.eye(X.shape[1])
    coef = np.linalg.solve(gram, Xc.T @ (y - y_mean))
    return y_mean - x_mean @ coef, coef


def mice_impute(md: MaskedDataset, max_iter: int = 10, ridge: float = 1e-6, tol: float = 1e-4,
                noise: bool = False, use_sensitive: bool = True,
                rng: Optional[np.random.Generator] = None) -> ImputedDataset:
    """Chained-equations imputation with ridge linear models.

    Missing entries start at column means. Each cycle regresses every amputed
    column on all other working columns over the rows where it is observed and
    overwrites its missing entries with the fitted values. Stops once the largest
    change of an imputed entry falls below ``tol`` or after ``max_iter`` cycles.
    With ``noise=True`` a Gaussian draw with the residual sd is added to every
    prediction.
    """
    if max_iter < 1 or tol <= 0 or ridge < 0:
        raise ValueError("max_iter and tol must be positive, ridge non-negative")
    require_donors(md)
    if noise and rng is None:
        rng = np.random.default_rng(0)
    cols = working_columns(md, use_sensitive)
    values, miss = _initial_fill(md, cols)
    targets = amputed_columns(md, cols)
    if not targets:
        return finish(md, cols, values, "mice", iterations_used=1)

    changes = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        biggest = 0.0
        for c in targets:
            others = [k for k in range(len(cols)) if k != c]
            seen = ~miss[:, c]
            X = values[:, others]
            intercept, coef = ridge_fit(X[seen], values[seen, c], ridge)
            pred = intercept + X[~seen] @ coef
            if noise:
                resid = values[seen, c] - (intercept + X[seen] @ coef)
                dof = max(seen.sum() - len(others) - 1, 1)
                pred = pred + rng.normal(0.0, np.sqrt(resid @ resid / dof), size=pred.shape)
            biggest = max(biggest, float(np.max(np.abs(pred - values[~seen, c]))))
            values[~seen, c] = pred
        changes.append(biggest)
        if biggest < tol:
            converged = True
            break
    return finish(md, cols, values, "mice", iterations_used=it, converged=converged,
                  diagnostics={"max_change": changes})


def forest_impute(md: MaskedDataset, n_trees: int = 10, max_depth: int = 8, max_iter: int = 10,
                  min_leaf: int = 1, mtry: Optional[int] = None, use_sensitive: bool = True,
                  rng: Optional[np.random.Generator] = None) -> ImputedDataset:
    """missForest: chained imputation with a regression forest per column.

    Cycles like :func:`mice_impute`. After each cycle the sum of squared changes
    of the imputed entries is compared with the previous cycle's; the first time
    it grows, the previous cycle's matrix is returned.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    require_donors(md)
    rng = rng if rng is not None else np.random.default_rng(0)
    cfg = ForestConfig(n_trees=n_trees, max_depth=max_depth, min_leaf=min_leaf, mtry=mtry)
    cols = working_columns(md, use_sensitive)
    values, miss = _initial_fill(md, cols)
    targets = amputed_columns(md, cols)
    if not targets:
        return finish(md, cols, values, "missforest", iterations_used=1)

    previous = values.copy()
    prev_change = np.inf
    changes = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        current = previous.copy()
        for c in targets:
            others = [k for k in range(len(cols)) if k != c]
            seen = ~miss[:, c]
            model = fit_forest(current[seen][:, others], current[seen, c], REGRESSION, cfg, rng)
            current[~seen, c] = predict_forest(model, current[~seen][:, others])
        change = float(np.sum((current - previous)[miss] ** 2))
        changes.append(change)
        if change > prev_change:
            converged = True
            it -= 1
            break
        previous = current
        prev_change = change
    return finish(md, cols, previous, "missforest", iterations_used=it, converged=converged,
                  diagnostics={"squared_change": changes})
