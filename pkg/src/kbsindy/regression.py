"""The estimation core: sequential thresholded least squares, with and
without kernel weighting.

The plain sparse loop alternates hard thresholding (strictly smaller than
lambda) with least squares restricted to the surviving columns until the
support stops changing.  The kernel-weighted variant runs the same loop with
every regression weighted by A = K + eta^2 I, then recovers the kernel
weights from the parametric residual:

    xi_kernel = A^{-1} (y - Theta xi_parametric)

which makes the fitted model satisfy the residual identity
y - Theta xi - K xi_kernel = eta^2 xi_kernel.  With a zero Gram matrix the
weighted loop reduces to the plain one; with lambda = 0 it reduces to the
closed-form joint estimate.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _linalg
from .errors import ShapeError, ValidationError
from .kernels import GramMatrix
from .library import MonomialLibrary

DEFAULT_MAX_ITER = 25


@dataclass(frozen=True)
class SparseSolution:
    """Result of a sequential-thresholding run on one target vector."""

    xi_parametric: np.ndarray
    support: tuple
    iterations: int
    converged: bool

    @property
    def nnz(self) -> int:
        return len(self.support)


@dataclass(frozen=True)
class ModelEstimate:
    """Everything needed to evaluate the fitted f(x, z).

    The parametric part is ``library`` with coefficients ``xi_parametric``;
    the nonparametric part is the kernel expansion over ``anchors`` with
    weights ``xi_kernel``.  ``kernel`` may be None for purely parametric
    fits, in which case the kernel part is identically zero.
    """

    library: MonomialLibrary
    xi_parametric: np.ndarray
    kernel: object | None
    anchors: np.ndarray | None
    xi_kernel: np.ndarray | None
    noise_var: float
    lam: float = 0.0
    iterations: int = 0
    converged: bool = True
    dof: float | None = None

    @property
    def support(self) -> tuple:
        return tuple(int(j) for j in np.flatnonzero(self.xi_parametric))

    @property
    def nnz(self) -> int:
        return len(self.support)

    @property
    def support_names(self) -> list:
        names = self.library.names
        return [names[j] for j in self.support]

    def coefficients_by_name(self) -> dict:
        return {
            name: float(c)
            for name, c in zip(self.library.names, self.xi_parametric)
        }


def _validate_regression(theta, y):
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if theta.shape[0] != y.shape[0]:
        raise ShapeError("Theta and y disagree on the number of rows")
    _linalg.check_finite("Theta", theta)
    _linalg.check_finite("y", y)
    return theta, y


def least_squares(theta, y) -> np.ndarray:
    """Minimum-norm least-squares solution of Theta v = y."""
    theta, y = _validate_regression(theta, y)
    return _linalg.lstsq_minnorm(theta, y)


def weighted_least_squares(theta, y, A) -> np.ndarray:
    """Solution of the A-weighted problem (Theta^T A^{-1} Theta)^{-1} Theta^T A^{-1} y.

    A must be symmetric positive definite; the problem is solved by whitening
    with the Cholesky factor of A, so a rank-deficient Theta falls back to
    the minimum-norm solution of the whitened system.
    """
    theta, y = _validate_regression(theta, y)
    A = np.asarray(A, dtype=float)
    if A.shape != (theta.shape[0], theta.shape[0]):
        raise ShapeError("weight matrix A has the wrong shape")
    L = _linalg.cholesky_spd(A)
    theta_w = scipy.linalg.solve_triangular(L, theta, lower=True)
    y_w = scipy.linalg.solve_triangular(L, y, lower=True)
    return _linalg.lstsq_minnorm(theta_w, y_w)


def _threshold_loop(solve, p, lam, max_iter):
    """Shared sequential-thresholding iteration.

    ``solve(support)`` returns the coefficient vector for the restricted
    regression on the given column indices.  Convergence means the support
    is unchanged between consecutive thresholding passes.
    """
    xi = np.zeros(p)
    support = tuple(range(p))
    xi[list(support)] = solve(support)
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        new_support = tuple(j for j in range(p) if abs(xi[j]) >= lam)
        if new_support == support:
            converged = True
            break
        support = new_support
        xi = np.zeros(p)
        if support:
            xi[list(support)] = solve(support)
    return xi, support, iterations, converged


def sindy(theta, y, lam: float, max_iter: int = DEFAULT_MAX_ITER) -> SparseSolution:
    """Sequential thresholded least squares.

    Coefficients strictly smaller than ``lam`` in magnitude are zeroed and
    the remaining columns refit, until the support settles.  ``lam = 0``
    reproduces plain least squares.
    """
    theta, y = _validate_regression(theta, y)
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    p = theta.shape[1]

    def solve(support):
        return _linalg.lstsq_minnorm(theta[:, list(support)], y)

    xi, support, iterations, converged = _threshold_loop(solve, p, lam, max_iter)
    return SparseSolution(
        xi_parametric=xi, support=support, iterations=iterations, converged=converged
    )


def _weighted_threshold_fit(theta, y, A, lam, max_iter):
    """A-weighted thresholding loop plus the kernel weights from line 9."""
    L = _linalg.cholesky_spd(A)
    theta_w = scipy.linalg.solve_triangular(L, theta, lower=True)
    y_w = scipy.linalg.solve_triangular(L, y, lower=True)

    def solve(support):
        return _linalg.lstsq_minnorm(theta_w[:, list(support)], y_w)

    xi, support, iterations, converged = _threshold_loop(
        solve, theta.shape[1], lam, max_iter
    )
    xi_kernel = _linalg.chol_solve(L, y - theta @ xi, refine_with=A)
    return xi, support, iterations, converged, xi_kernel


def kb_sindy(
    theta,
    y,
    gram: GramMatrix,
    noise_var: float,
    lam: float,
    max_iter: int = DEFAULT_MAX_ITER,
    library: MonomialLibrary | None = None,
    kernel=None,
) -> ModelEstimate:
    """Kernel-weighted sequential thresholding.

    Runs the thresholding loop with all regressions weighted by
    A = K + noise_var * I, then sets the kernel weights to
    A^{-1}(y - Theta xi).  A zero Gram matrix delegates to :func:`sindy`
    so the two agree coefficient-for-coefficient in that limit.
    """
    theta, y = _validate_regression(theta, y)
    if noise_var <= 0:
        raise ValidationError("noise variance must be positive")
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    m = theta.shape[0]
    if gram.m != m:
        raise ShapeError("Gram matrix and targets disagree on m")

    if gram.is_zero:
        sol = sindy(theta, y, lam, max_iter)
        xi, support = sol.xi_parametric, sol.support
        iterations, converged = sol.iterations, sol.converged
        xi_kernel = (y - theta @ xi) / noise_var
    else:
        A = gram.matrix + noise_var * np.eye(m)
        xi, support, iterations, converged, xi_kernel = _weighted_threshold_fit(
            theta, y, A, lam, max_iter
        )

    return ModelEstimate(
        library=library,
        xi_parametric=xi,
        kernel=kernel,
        anchors=gram.anchors,
        xi_kernel=xi_kernel,
        noise_var=float(noise_var),
        lam=float(lam),
        iterations=iterations,
        converged=converged,
    )


def closed_form_estimate(theta, y, gram: GramMatrix, noise_var: float):
    """Joint non-sparse estimate of the parametric and kernel coefficients.

    Minimizes ||y - Theta xi - K xi_kernel||^2 + noise_var * xi_kernel^T K
    xi_kernel; identical to :func:`kb_sindy` with lambda = 0.
    """
    model = kb_sindy(theta, y, gram, noise_var, lam=0.0)
    return model.xi_parametric, model.xi_kernel


def residual_identity_gap(theta, y, gram: GramMatrix, model: ModelEstimate) -> float:
    """Relative norm of y - Theta xi - K xi_kernel - noise_var * xi_kernel."""
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    gap = (
        y
        - theta @ model.xi_parametric
        - gram.matrix @ model.xi_kernel
        - model.noise_var * model.xi_kernel
    )
    scale = max(float(np.linalg.norm(y)), 1e-300)
    return float(np.linalg.norm(gap)) / scale
