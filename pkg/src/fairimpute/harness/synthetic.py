"""Synthetic group-imbalanced datasets standing in for restricted real data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset, DataError, normalize_columns

RESPONSES = ("logistic", "linear", "none")


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator settings.

    Features follow a shared low-rank factor model; the minority group's mean is
    shifted by ``mean_shift`` times a fixed random direction and each group has
    its own noise sd multiplier. The sensitive column is named ``g``; ``g = 1``
    marks the majority.
    """

    n: int = 1000
    p: int = 10
    majority_fraction: float = 0.7
    mean_shift: float = 0.0
    noise_sd_majority: float = 1.0
    noise_sd_minority: float = 1.0
    rank: int = 3
    response: str = "logistic"
    response_strength: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.p < 1:
            raise DataError("n must be at least 2 and p positive")
        if not 0.0 < self.majority_fraction < 1.0:
            raise DataError("majority_fraction must lie in (0, 1)")
        if self.noise_sd_majority <= 0 or self.noise_sd_minority <= 0:
            raise DataError("noise multipliers must be positive")
        if not 1 <= self.rank <= self.p:
            raise DataError(f"rank {self.rank} must lie in [1, p={self.p}]")
        if self.response not in RESPONSES:
            raise DataError(f"response must be one of {RESPONSES}")


def generate_synthetic(spec: SyntheticSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    n, p = spec.n, spec.p
    # exact group sizes, random placement
    n_major = min(n - 1, max(1, int(round(n * spec.majority_fraction))))
    majority = np.zeros(n, dtype=bool)
    majority[rng.permutation(n)[:n_major]] = True
    loadings = rng.normal(size=(spec.rank, p)) / np.sqrt(spec.rank)
    direction = rng.normal(size=p)
    factors = rng.normal(size=(n, spec.rank))
    noise_sd = np.where(majority, spec.noise_sd_majority, spec.noise_sd_minority)
    X = factors @ loadings + noise_sd[:, None] * rng.normal(size=(n, p))
    X[~majority] += spec.mean_shift * direction

    columns = [f"x{j + 1}" for j in range(p)] + ["g"]
    blocks = [X, majority.astype(float)[:, None]]
    response_col = None
    if spec.response != "none":
        beta = rng.normal(size=p) / np.sqrt(p)
        Xs = (X - X.mean(axis=0)) / X.std(axis=0)
        signal = spec.response_strength * (Xs @ beta)
        if spec.response == "logistic":
            y = (rng.random(n) < 1.0 / (1.0 + np.exp(-signal))).astype(float)
        else:
            y = signal + rng.normal(scale=0.5, size=n)
        columns.append("y")
        blocks.append(y[:, None])
        response_col = p + 1
    ds = Dataset(np.hstack(blocks), columns, sensitive_col=p, majority_value=1.0,
                 response_col=response_col)
    return normalize_columns(ds)
