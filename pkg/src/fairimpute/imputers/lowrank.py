"""Matrix-completion imputers: SoftImpute and OptSpace.

Both operate on the feature submatrix only; sensitive and response columns are
neither read nor written.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..amputation import MaskedDataset
from .base import ImputationError, ImputedDataset, finish


def _feature_block(md: MaskedDataset):
    cols = list(md.dataset.feature_cols)
    if not cols:
        raise ImputationError("feature submatrix is empty")
    sub = md.observed[:, cols]
    seen = ~np.isnan(sub)
    return cols, np.where(seen, sub, 0.0), seen


def nuclear_objective(zero_filled, seen, estimate, lam: float) -> float:
    """``0.5 * ||P_obs(Z - M)||_F^2 + lam * ||M||_*``."""
    resid = np.where(seen, zero_filled - estimate, 0.0)
    return 0.5 * float(np.sum(resid**2)) + lam * float(np.linalg.svd(estimate, compute_uv=False).sum())


def soft_impute(md: MaskedDataset, lam: Optional[float] = None, lam_fraction: float = 0.1,
                rank_cap: Optional[int] = None, tol: float = 1e-5, max_iter: int = 200,
                n_lambdas: int = 10, warm_start: bool = True, track_objective: bool = False
                ) -> ImputedDataset:
    """Nuclear-norm regularized completion by iterated singular value soft-thresholding.

    Each step fills the missing entries from the current estimate, takes an SVD,
    shrinks the singular values by ``lam`` and reconstructs (keeping at most
    ``rank_cap`` components). ``lam`` defaults to ``lam_fraction`` times the top
    singular value of the zero-filled matrix.

    With ``warm_start`` the target ``lam`` is approached along a geometric path of
    ``n_lambdas`` values starting at that top singular value, each solved from the
    previous solution; ``max_iter`` and ``tol`` apply to every stage. Small ``lam``
    is otherwise impractically slow to reach from a zero start.
    """
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol and max_iter must be positive")
    cols, zf, seen = _feature_block(md)
    n, p = zf.shape
    cap = min(n, p) if rank_cap is None else max(1, min(rank_cap, n, p))
    sigma_max = float(np.linalg.norm(zf, 2))
    if lam is None:
        lam = lam_fraction * sigma_max
    if lam < 0:
        raise ValueError("lam must be non-negative")

    if warm_start and n_lambdas > 1 and lam < sigma_max:
        path = np.geomspace(sigma_max, max(lam, 1e-12 * sigma_max), n_lambdas)
        path[-1] = lam
    else:
        path = np.array([lam])

    Z = np.zeros_like(zf)
    objectives = []
    total = 0
    converged = False
    for stage_lam in path:
        stage_obj = []
        converged = False
        for _ in range(max_iter):
            W = np.where(seen, zf, Z)
            U, s, Vt = np.linalg.svd(W, full_matrices=False)
            s = np.maximum(s[:cap] - stage_lam, 0.0)
            Z_new = (U[:, :cap] * s) @ Vt[:cap]
            total += 1
            ref = np.linalg.norm(Z)
            delta = np.linalg.norm(Z_new - Z)
            Z = Z_new
            if track_objective:
                stage_obj.append(nuclear_objective(zf, seen, Z, stage_lam))
            if delta == 0.0 or (ref > 0 and delta / ref < tol):
                converged = True
                break
        if track_objective:
            objectives.append((float(stage_lam), stage_obj))
    diagnostics = {"lambda": lam, "sigma_max": sigma_max}
    if track_objective:
        diagnostics["objective"] = objectives
    return finish(md, cols, Z, "softimpute", iterations_used=total, converged=converged,
                  diagnostics=diagnostics)


def pick_rank(singular_values: np.ndarray, top: int = 10) -> int:
    """Rank at the largest ratio between consecutive leading singular values."""
    s = np.asarray(singular_values, dtype=float)[:top]
    s = s[s > 1e-12 * max(s[0], 1e-300)] if s.size and s[0] > 0 else s[:0]
    if s.size <= 1:
        return 1
    ratios = s[:-1] / s[1:]
    return int(np.argmax(ratios)) + 1


def _least_squares_rows(Z, weights, F):
    # row-wise minimizers of sum_j w_ij (z_ij - u_i . f_j)^2; pinv gives the
    # minimum-norm solution when a row observes too few entries
    gram = np.einsum("ij,jk,jl->ikl", weights, F, F)
    rhs = (weights * Z) @ F
    return np.einsum("ikl,il->ik", np.linalg.pinv(gram), rhs)


def optspace_impute(md: MaskedDataset, rank: Optional[int] = None, tol: float = 1e-5,
                    max_iter: int = 100) -> ImputedDataset:
    """Low-rank completion: trimming, spectral initialization, then refinement.

    Rows and columns observed more than twice as often as average are zeroed
    before the rank-``rank`` SVD of the rescaled zero-filled matrix. The factors
    are then refined by alternating least squares on the observed entries until
    the relative decrease of the observed squared error drops below ``tol``.
    ``rank=None`` picks the rank from the largest singular-value gap.
    """
    cols, zf, seen = _feature_block(md)
    n, p = zf.shape
    n_obs = int(seen.sum())
    if n_obs == 0:
        raise ImputationError("all entries are missing")
    if rank is not None and not 1 <= rank <= min(n, p):
        raise ImputationError(f"rank {rank} outside [1, {min(n, p)}]")

    w = seen.astype(float)
    trimmed = zf.copy()
    row_obs = w.sum(axis=1)
    col_obs = w.sum(axis=0)
    trimmed[row_obs > 2 * row_obs.mean()] = 0.0
    trimmed[:, col_obs > 2 * col_obs.mean()] = 0.0
    U, s, Vt = np.linalg.svd(trimmed * (n * p / n_obs), full_matrices=False)
    r = pick_rank(s) if rank is None else rank
    root = np.sqrt(s[:r])
    left = U[:, :r] * root
    right = Vt[:r].T * root

    def observed_error():
        resid = w * (zf - left @ right.T)
        return float(np.sum(resid**2))

    errors = [observed_error()]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        left = _least_squares_rows(zf, w, right)
        errors.append(observed_error())
        right = _least_squares_rows(zf.T, w.T, left)
        errors.append(observed_error())
        before, after = errors[-3], errors[-1]
        if before - after <= tol * max(before, 1e-300):
            converged = True
            break
    return finish(md, cols, left @ right.T, "optspace", iterations_used=it, converged=converged,
                  diagnostics={"rank": r, "observed_error": errors})
