"""Closed-form ridge regression, ``beta = (D^T D + lambda I)^-1 D^T y``."""

from __future__ import annotations

import warnings

import numpy as np
from scipy import linalg

from .errors import ConfigError, NumericalError, ShapeError

RESIDUAL_TOL = 1e-8


def normal_equation_residual(D, y, lam, beta) -> float:
    """``||(D^T D + lambda I) beta - D^T y||_inf`` relative to ``max(1, ||D^T y||_inf)``."""
    D = np.asarray(D, dtype=float)
    rhs = D.T @ y
    lhs = D.T @ (D @ beta) + lam * beta
    return float(np.max(np.abs(lhs - rhs), initial=0.0) / max(1.0, np.max(np.abs(rhs), initial=0.0)))


def _spd_solve(A: np.ndarray, b: np.ndarray, lam: float) -> np.ndarray:
    if lam > 0.0:
        try:
            factor = linalg.cho_factor(A, lower=False, check_finite=False)
        except linalg.LinAlgError as exc:
            raise NumericalError(f"Cholesky factorization failed: {exc}") from None

        def solve(rhs):
            return linalg.cho_solve(factor, rhs, check_finite=False)
    else:
        with warnings.catch_warnings():
            # singularity is reported below with the pivot values
            warnings.simplefilter("ignore", linalg.LinAlgWarning)
            lu, piv = linalg.lu_factor(A, check_finite=False)
        pivots = np.abs(np.diag(lu))
        smallest = float(pivots.min())
        if smallest <= A.shape[0] * np.finfo(float).eps * float(pivots.max()):
            raise NumericalError(
                f"singular system with lambda=0: smallest pivot {smallest:.3e} "
                f"(largest {float(pivots.max()):.3e}); use lambda > 0"
            )

        def solve(rhs):
            return linalg.lu_solve((lu, piv), rhs, check_finite=False)

    x = solve(b)
    # two steps of iterative refinement tighten the normal-equation residual
    for _ in range(2):
        x = x + solve(b - A @ x)
    return x


def ridge_solve(D, y, lam: float, form: str = "auto") -> np.ndarray:
    """Ridge coefficients for design ``D`` (n x m) and target ``y`` (n,).

    ``form="auto"`` solves the m x m primal system when ``m <= n`` and the
    n x n dual system ``beta = D^T (D D^T + lambda I)^-1 y`` otherwise; both
    can be forced with ``"primal"`` / ``"dual"``.

    Raises :class:`NumericalError` when ``lam == 0`` and the system is singular,
    or when the normal-equation residual exceeds ``1e-8 * max(1, ||D^T y||_inf)``.
    """
    D = np.asarray(D, dtype=float)
    y = np.asarray(y, dtype=float)
    if D.ndim != 2 or y.ndim != 1 or D.shape[0] != y.size:
        raise ShapeError(f"design {D.shape} and target {y.shape} are not aligned")
    lam = float(lam)
    if not lam >= 0.0:
        raise ConfigError(f"lambda must be >= 0, got {lam}")
    n, m = D.shape
    if form == "auto":
        form = "primal" if m <= n else "dual"
    if form == "primal":
        A = D.T @ D
        A[np.diag_indices_from(A)] += lam
        beta = _spd_solve(A, D.T @ y, lam)
    elif form == "dual":
        K = D @ D.T
        K[np.diag_indices_from(K)] += lam
        beta = D.T @ _spd_solve(K, y, lam)
    else:
        raise ConfigError(f"unknown form {form!r}")

    resid = normal_equation_residual(D, y, lam, beta)
    if not resid <= RESIDUAL_TOL:
        raise NumericalError(
            f"ridge solution residual {resid:.3e} exceeds {RESIDUAL_TOL:g} (lambda={lam:g}, {form} form)"
        )
    return beta
