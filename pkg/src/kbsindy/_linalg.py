"""Factorized solves shared by the regression and selection code.

Inverses are never formed explicitly: every expression of the form A^{-1}B
goes through a Cholesky factorization, with a small additive jitter escalated
on failure (1e-12*trace/m up to 1e-6*trace/m).  Rank-deficient unweighted
least squares falls back to an SVD pseudo-inverse with a relative
singular-value cutoff.
"""

import numpy as np
import scipy.linalg

from .errors import NumericalError, ValidationError

# Relative singular-value cutoff for pseudo-inverse fallbacks.
SVD_CUTOFF = 1e-10

_JITTERS = (0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6)


def check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")


def cholesky_spd(A):
    """Lower Cholesky factor of a symmetric matrix, with jitter escalation.

    Returns the factor L (A + jitter*I = L L^T).  Raises NumericalError if
    the matrix is not positive definite within the jitter budget.
    """
    m = A.shape[0]
    base = np.trace(A) / m
    if base <= 0.0:
        base = 1.0
    for jit in _JITTERS:
        try:
            if jit == 0.0:
                return scipy.linalg.cholesky(A, lower=True)
            return scipy.linalg.cholesky(A + (jit * base) * np.eye(m), lower=True)
        except scipy.linalg.LinAlgError:
            continue
    raise NumericalError(
        "matrix is not positive definite within the jitter tolerance"
    )


def chol_solve(L, B, refine_with=None, steps=2):
    """Solve (L L^T) X = B given the lower Cholesky factor L.

    When ``refine_with`` (the original matrix A) is supplied, a few steps of
    iterative refinement are applied; this keeps the residual identity of the
    estimates tight even when A is badly conditioned.
    """
    X = scipy.linalg.cho_solve((L, True), B)
    if refine_with is not None:
        for _ in range(steps):
            R = B - refine_with @ X
            X = X + scipy.linalg.cho_solve((L, True), R)
    return X


def lstsq_minnorm(A, b):
    """Minimum-norm least-squares solution with relative SVD cutoff."""
    sol, _, _, _ = np.linalg.lstsq(A, b, rcond=SVD_CUTOFF)
    return sol


def trace_inverse(L):
    """trace(A^{-1}) from the lower Cholesky factor of A (= ||L^{-1}||_F^2)."""
    Linv = scipy.linalg.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    return float(np.sum(Linv * Linv))
