"""Shared least-squares core built on a column-pivoted QR factorization.

Rank decisions use a relative pivot threshold: a column whose pivot falls
below RANK_RTOL times the leading pivot is treated as linearly dependent.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import SingularDesignError

RANK_RTOL = 1e-10


def design_with_intercept(columns: np.ndarray) -> np.ndarray:
    """Prepend a constant column of ones to a (n, p) feature matrix."""
    n = columns.shape[0]
    return np.hstack([np.ones((n, 1)), columns])


def _pivoted_qr(a: np.ndarray):
    q, r, piv = scipy.linalg.qr(a, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(diag >= RANK_RTOL * diag[0]))
    return q, r, piv, rank


def solve_least_squares(a: np.ndarray, y: np.ndarray, column_names: list[str]) -> np.ndarray:
    """Solve min ||a x - y|| for a full-column-rank design.

    Raises SingularDesignError naming the dependent columns when the
    relative pivot check detects rank deficiency.
    """
    q, r, piv, rank = _pivoted_qr(a)
    p = a.shape[1]
    if rank < p:
        dependent = sorted(column_names[j] for j in piv[rank:])
        raise SingularDesignError(dependent)
    z = scipy.linalg.solve_triangular(r, q.T @ y)
    beta = np.empty(p)
    beta[piv] = z
    return beta


def projection_r_squared(y: np.ndarray, regressors: np.ndarray) -> float:
    """R-squared of y regressed (with intercept) on the given columns.

    Rank deficiency among the regressors is harmless here: dependent
    columns are dropped by the pivot check, which leaves the fitted
    projection, and hence R-squared, unchanged.
    """
    a = design_with_intercept(regressors)
    q, _, _, rank = _pivoted_qr(a)
    basis = q[:, :rank]
    residual = y - basis @ (basis.T @ y)
    ss_res = float(residual @ residual)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    if ss_tot == 0.0:
        return 0.0
    r2 = 1.0 - ss_res / ss_tot
    return min(max(r2, 0.0), 1.0)
