"""Subspace pursuit with deterministic tie-breaking.

Index selection always breaks magnitude ties toward the lower index, so the
result is a pure function of ``(y, A, t)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq

__all__ = ["PursuitResult", "subspace_pursuit", "least_squares_on_support", "top_k"]


@dataclass
class PursuitResult:
    support_est: np.ndarray
    coeffs: np.ndarray
    residual_norm: float
    iterations: int
    rank_deficient: bool = False


def top_k(scores: np.ndarray, k: int) -> np.ndarray:
    """Sorted positions of the ``k`` largest scores, ties to the lower position."""
    order = np.argsort(-scores, kind="stable")
    return np.sort(order[:k])


def _lstsq(a_s: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, bool]:
    # gelsy: QR with column pivoting, then a complete orthogonal factorization;
    # gives the minimum-norm minimizer whenever the columns are dependent
    k = a_s.shape[1]
    if k == 0:
        return np.zeros(0), False
    c, _, rank, _ = lstsq(a_s, y, lapack_driver="gelsy", check_finite=False)
    return c, rank < k


def least_squares_on_support(a: np.ndarray, y: np.ndarray, s) -> np.ndarray:
    """Minimize ``||y - A[:, s] c||`` by an orthogonal factorization.

    When ``A[:, s]`` has more columns than rows, or is rank deficient, the
    minimum-norm minimizer is returned.
    """
    s = np.asarray(s, dtype=np.int64)
    return _lstsq(a[:, s], y)[0]


def subspace_pursuit(y: np.ndarray, a: np.ndarray, t: int, max_iter: int | None = None) -> PursuitResult:
    """Estimate a ``t``-sparse support from ``y = A x + e``.

    Parameters
    ----------
    y : (M,) array
        Measurement vector.
    a : (M, N) array
        Measurement matrix with unit-norm columns.
    t : int
        Sparsity; the returned support always has exactly ``t`` indices.
    max_iter : int, optional
        Iteration cap, ``2 t`` by default.

    Returns
    -------
    PursuitResult
        The lowest-residual iterate.  Iteration stops as soon as the
        residual norm fails to strictly decrease.
    """
    m, n = a.shape
    if not 0 < t < n:
        raise ValueError(f"need 0 < t < N, got t={t}, N={n}")
    if max_iter is None:
        max_iter = 2 * t
    flagged = False

    support = top_k(np.abs(a.T @ y), t)
    coeffs, bad = _lstsq(a[:, support], y)
    flagged |= bad
    resid = y - a[:, support] @ coeffs
    best_norm = float(np.linalg.norm(resid))
    iterations = 0

    n_new = min(t, n - t)
    for _ in range(max_iter):
        corr = np.abs(a.T @ resid)
        # residual is orthogonal to the current columns, exclude them outright
        corr[support] = -1.0
        merged = np.union1d(support, top_k(corr, n_new))
        c_merged, bad = _lstsq(a[:, merged], y)
        flagged |= bad
        cand = merged[top_k(np.abs(c_merged), t)]
        c_cand, bad = _lstsq(a[:, cand], y)
        flagged |= bad
        r_cand = y - a[:, cand] @ c_cand
        norm = float(np.linalg.norm(r_cand))
        if not norm < best_norm:
            break
        support, coeffs, resid, best_norm = cand, c_cand, r_cand, norm
        iterations += 1

    return PursuitResult(support, coeffs, best_norm, iterations, flagged)
