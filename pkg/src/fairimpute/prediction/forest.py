"""Bagged CART forests for classification and regression."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .tree import apply_tree, grow_tree

CLASSIFICATION = "classification"
REGRESSION = "regression"


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 12
    min_leaf: int = 5
    mtry: Optional[int] = None  # None: sqrt(p) for classification, p/3 for regression
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 0 or self.min_leaf < 1:
            raise ValueError("n_trees and min_leaf must be positive, max_depth non-negative")
        if self.mtry is not None and self.mtry < 1:
            raise ValueError("mtry must be positive")


@dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=int)
        for k in range(self.n_nodes):
            if self.left[k] >= 0:
                depth[self.left[k]] = depth[self.right[k]] = depth[k] + 1
        return int(depth.max())


@dataclass
class ForestModel:
    trees: list
    task: str
    feature_count: int
    classes: np.ndarray = field(default_factory=lambda: np.empty(0))


def _resolve_mtry(cfg: ForestConfig, task: str, p: int) -> int:
    if cfg.mtry is not None:
        return min(cfg.mtry, p)
    if task == CLASSIFICATION:
        return max(1, int(math.floor(math.sqrt(p))))
    return max(1, p // 3)


def fit_forest(X, y, task: str = CLASSIFICATION, config: Optional[ForestConfig] = None,
               rng: Optional[np.random.Generator] = None) -> ForestModel:
    """Fit a bagged forest of CART trees.

    Each tree sees a bootstrap sample and ``mtry`` randomly chosen candidate
    columns per node; classification splits minimize Gini impurity, regression
    splits minimize within-node variance. Deterministic given ``rng``.
    """
    cfg = config or ForestConfig()
    rng = rng if rng is not None else np.random.default_rng(0)
    X = np.ascontiguousarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("empty training set")
    if y.shape[0] != X.shape[0]:
        raise ValueError("X and y lengths differ")
    if not np.all(np.isfinite(X)):
        raise ValueError("training features contain missing or non-finite values")
    n, p = X.shape
    if task == CLASSIFICATION:
        classes, codes = np.unique(y, return_inverse=True)
        target = codes.astype(float)
        n_classes = len(classes)
    elif task == REGRESSION:
        classes = np.empty(0)
        target = y.astype(float)
        n_classes = 0
    else:
        raise ValueError(f"unknown task {task!r}")
    mtry = _resolve_mtry(cfg, task, p)

    trees = []
    for _ in range(cfg.n_trees):
        if cfg.bootstrap:
            sample = rng.integers(0, n, size=n)
        else:
            sample = np.arange(n)
        seed = int(rng.integers(0, 2**31 - 1))
        f, t, lft, rgt, val, _ = grow_tree(
            X, target, sample.astype(np.int64), n_classes, cfg.max_depth, cfg.min_leaf, mtry, seed
        )
        trees.append(Tree(f, t, lft, rgt, val))
    return ForestModel(trees, task, p, classes)


def tree_outputs(model: ForestModel, X) -> np.ndarray:
    """Per-tree predictions, shape (n_trees, n): class codes or leaf means."""
    X = np.ascontiguousarray(X, dtype=float)
    out = np.empty((len(model.trees), X.shape[0]))
    for k, tree in enumerate(model.trees):
        leaves = apply_tree(X, tree.feature, tree.threshold, tree.left, tree.right)
        if model.task == CLASSIFICATION:
            # argmax returns the first maximum, i.e. the smaller class on ties
            out[k] = np.argmax(tree.value[leaves], axis=1)
        else:
            out[k] = tree.value[leaves, 0]
    return out


def predict_forest(model: ForestModel, X) -> np.ndarray:
    """Majority vote (classification) or mean of tree outputs (regression)."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.feature_count:
        raise ValueError(f"expected {model.feature_count} feature columns, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("prediction features contain missing or non-finite values")
    outs = tree_outputs(model, X)
    if model.task == REGRESSION:
        return outs.mean(axis=0)
    k = len(model.classes)
    votes = np.zeros((k, X.shape[0]), dtype=np.int64)
    for c in range(k):
        votes[c] = (outs == c).sum(axis=0)
    return model.classes[np.argmax(votes, axis=0)]
