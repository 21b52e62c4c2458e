"""Derivative and noise-variance estimation from noisy samples.

The smoother is a cubic smoothing spline: it minimizes

    sum_i w_i (s_i - g(t_i))^2 + penalty * integral g''(t)^2 dt

over natural cubic splines with knots at the sample times (w_i = 1 by
default).  The penalty is chosen by generalized cross-validation unless
supplied.  All linear algebra is banded, so one smoothing pass costs O(m).

For strongly nonstationary records sampled in distinct regimes, smoothing
is applied piecewise per segment; for signals with level-proportional (CV)
noise the weights can be tied to the estimated signal level, emulating a
smoother with time-varying noise variance.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import minimize_scalar

from .errors import UnsupportedGridError, ValidationError


@dataclass(frozen=True)
class SmoothedSeries:
    """Smoothed signal, its first derivative, and the noise estimates.

    ``noise_var_hat`` estimates the measurement-noise variance of the raw
    samples (the common scale factor sigma0^2 with var_i = sigma0^2 / w_i
    when weights are used); ``derivative_var_hat`` estimates the error
    variance of the derivative estimates themselves, i.e. the sample noise
    propagated through the linear smooth-then-differentiate map.  The
    latter is the noise level of a regression built on these derivatives.
    """

    values: np.ndarray
    derivatives: np.ndarray
    noise_var_hat: float
    penalty: float
    dof: float
    derivative_var_hat: float


class _SplineSystem:
    """Banded pieces of the weighted natural-spline smoother at fixed knots."""

    def __init__(self, times, weights=None):
        m = times.shape[0]
        h = np.diff(times)
        k = m - 2
        a = 1.0 / h[:-1]
        c = 1.0 / h[1:]
        b = -(a + c)
        winv = np.ones(m) if weights is None else 1.0 / np.asarray(weights, float)
        self.m, self.h = m, h
        self.a, self.b, self.c = a, b, c
        self.winv = winv

        # Lower banded storage, rows: diagonal, first sub, second sub.
        QtWQ = np.zeros((3, k))
        QtWQ[0] = a * a * winv[:-2] + b * b * winv[1:-1] + c * c * winv[2:]
        QtWQ[1, :-1] = b[:-1] * a[1:] * winv[1:-2] + c[:-1] * b[1:] * winv[2:-1]
        QtWQ[2, :-2] = c[:-2] * a[2:] * winv[2:-2]
        self.QtWQ = QtWQ

        R = np.zeros((3, k))
        R[0] = (h[:-1] + h[1:]) / 3.0
        R[1, :-1] = h[1:-1] / 6.0
        self.R = R

    def qt_apply(self, v):
        """Apply Q^T; works on vectors and on matrices column-wise."""
        a, b, c = self.a, self.b, self.c
        if v.ndim > 1:
            a, b, c = a[:, None], b[:, None], c[:, None]
        return a * v[:-2] + b * v[1:-1] + c * v[2:]

    def q_winv_apply(self, g):
        """Apply W^{-1} Q; works on vectors and on matrices column-wise."""
        out = np.zeros((self.m,) + g.shape[1:])
        a, b, c, winv = self.a, self.b, self.c, self.winv
        if g.ndim > 1:
            a, b, c, winv = a[:, None], b[:, None], c[:, None], winv[:, None]
        out[:-2] += a * g
        out[1:-1] += b * g
        out[2:] += c * g
        return out * winv

    def solve(self, penalty, samples):
        """One smoothing pass; returns (values, weighted rss, trace of smoother)."""
        band = self.R + penalty * self.QtWQ
        cb = scipy.linalg.cholesky_banded(band, lower=True)
        gamma = scipy.linalg.cho_solve_banded((cb, True), self.qt_apply(samples))
        values = samples - penalty * self.q_winv_apply(gamma)
        resid = samples - values
        rss = float(np.sum(resid * resid / self.winv))
        z0, z1, z2 = _banded_inverse_bands(cb)
        k = self.m - 2
        tr = float(
            np.sum(z0 * self.QtWQ[0])
            + 2.0 * np.sum(z1[: k - 1] * self.QtWQ[1, : k - 1])
            + 2.0 * np.sum(z2[: k - 2] * self.QtWQ[2, : k - 2])
        )
        return values, rss, self.m - penalty * tr

    def derivative(self, g):
        """First derivative at the knots of the natural spline through g."""
        single = g.ndim == 1
        G = g[:, None] if single else g
        M = np.zeros_like(G)
        M[1:-1] = scipy.linalg.solveh_banded(self.R, self.qt_apply(G), lower=True)
        d = np.empty_like(G)
        h = self.h
        hc = h[:, None]
        d[:-1] = (G[1:] - G[:-1]) / hc - hc * (2 * M[:-1] + M[1:]) / 6.0
        d[-1] = (G[-1] - G[-2]) / h[-1] + h[-1] * (M[-2] + 2 * M[-1]) / 6.0
        return d[:, 0] if single else d

    def gcv_penalty(self, samples):
        """Penalty minimizing the GCV score m*rss/(m - trace)^2."""
        m = self.m
        scale = float(np.sum(self.R[0]) / np.sum(self.QtWQ[0]))

        def gcv(log_mu):
            _, rss, tr = self.solve(np.exp(log_mu), samples)
            return m * rss / max(m - tr, 1e-8) ** 2

        log_grid = np.log(scale) + np.linspace(-9.0, 13.0, 45) * np.log(10.0) / 2.0
        scores = [gcv(lg) for lg in log_grid]
        k = int(np.argmin(scores))
        lo = log_grid[max(k - 1, 0)]
        hi = log_grid[min(k + 1, len(log_grid) - 1)]
        res = minimize_scalar(gcv, bounds=(lo, hi), method="bounded")
        best = float(res.x) if res.fun <= scores[k] else float(log_grid[k])
        return float(np.exp(best))


def _banded_inverse_bands(cb):
    """Central bands of the inverse of a banded SPD matrix.

    ``cb`` is the lower-banded Cholesky factor from
    ``scipy.linalg.cholesky_banded(..., lower=True)``.  Returns (z0, z1, z2):
    the diagonal and first two superdiagonals of the inverse, via the
    standard backward recursion on the LDL^T factors.
    """
    k = cb.shape[1]
    d = cb[0] ** 2
    l1 = np.zeros(k)
    l2 = np.zeros(k)
    l1[: k - 1] = cb[1, : k - 1] / cb[0, : k - 1]
    l2[: k - 2] = cb[2, : k - 2] / cb[0, : k - 2]

    z0 = np.zeros(k)  # Z[i, i]
    z1 = np.zeros(k)  # Z[i, i+1]
    z2 = np.zeros(k)  # Z[i, i+2]
    for i in range(k - 1, -1, -1):
        z0_n1 = z0[i + 1] if i + 1 < k else 0.0
        z0_n2 = z0[i + 2] if i + 2 < k else 0.0
        z1_n1 = z1[i + 1] if i + 1 < k else 0.0
        z2[i] = -l1[i] * z1_n1 - l2[i] * z0_n2
        z1[i] = -l1[i] * z0_n1 - l2[i] * z1_n1
        z0[i] = 1.0 / d[i] - l1[i] * z1[i] - l2[i] * z2[i]
    return z0, z1, z2


def smooth_and_differentiate(times, samples, penalty=None, weights=None) -> SmoothedSeries:
    """Fit a GCV-tuned cubic smoothing spline and differentiate it.

    Optional ``weights`` rescale the fit term per sample (larger weight =
    trusted more), for records whose noise level varies along the signal.
    Returns the smoothed values, the spline's first derivative at the
    sample times, the residual-based noise estimate, the propagated
    derivative-error variance, and the penalty actually used.
    """
    times = np.asarray(times, dtype=float).ravel()
    samples = np.asarray(samples, dtype=float).ravel()
    m = times.shape[0]
    if m < 4:
        raise ValidationError("spline smoothing needs at least 4 samples")
    if samples.shape[0] != m:
        raise ValidationError("times and samples must have equal length")
    if np.any(np.diff(times) <= 0):
        raise ValidationError("times must be strictly increasing")
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(samples))):
        raise ValidationError("inputs contain non-finite entries")
    if weights is not None:
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.shape[0] != m or np.any(weights <= 0):
            raise ValidationError("weights must be positive, one per sample")

    system = _SplineSystem(times, weights)
    if penalty is None:
        penalty = system.gcv_penalty(samples)
    elif penalty <= 0:
        raise ValidationError("penalty must be positive")
    values, rss, tr = system.solve(penalty, samples)
    noise_var = rss / max(m - tr, 1e-8)

    # The smoothing spline is the natural cubic spline through its own
    # fitted values, so its derivative comes from that interpolant.
    derivative = system.derivative(values)

    # Propagate the sample noise through the (linear) smooth-then-
    # differentiate map D: with var_i = noise_var / w_i, the mean of
    # sum_j D_ij^2 var_j over rows i is the average error variance of the
    # derivative estimates.
    band = system.R + penalty * system.QtWQ
    cb = scipy.linalg.cholesky_banded(band, lower=True)
    gamma_cols = scipy.linalg.cho_solve_banded((cb, True), system.qt_apply(np.eye(m)))
    smoother = np.eye(m) - penalty * system.q_winv_apply(gamma_cols)
    D = system.derivative(smoother)
    derivative_var = noise_var * float(np.mean((D * D) @ system.winv))

    return SmoothedSeries(
        values=values,
        derivatives=derivative,
        noise_var_hat=float(noise_var),
        penalty=float(penalty),
        dof=float(tr),
        derivative_var_hat=float(derivative_var),
    )


def smooth_piecewise(times, samples, segment_sizes, penalty=None, cv_weights=False):
    """Smooth consecutive segments independently; pool the noise estimate.

    ``segment_sizes`` lists the sample count of each segment in order (the
    last may be omitted and is inferred).  With ``cv_weights`` the noise sd
    is assumed proportional to the signal level: a first unweighted pass
    estimates the level, and a second pass weights each sample by
    1/level^2.  Returns a SmoothedSeries covering the full record with the
    noise pool and dof accumulated across segments.
    """
    times = np.asarray(times, dtype=float).ravel()
    samples = np.asarray(samples, dtype=float).ravel()
    sizes = [int(s) for s in segment_sizes]
    if sum(sizes) < times.shape[0]:
        sizes.append(times.shape[0] - sum(sizes))
    if sum(sizes) != times.shape[0]:
        raise ValidationError("segment sizes exceed the record length")

    values = np.empty_like(samples)
    derivatives = np.empty_like(samples)
    rss_total = 0.0
    dof_total = 0.0
    deriv_var_acc = 0.0
    penalties = []
    start = 0
    for size in sizes:
        stop = start + size
        t_seg, s_seg = times[start:stop], samples[start:stop]
        weights = None
        if cv_weights:
            level = np.abs(smooth_and_differentiate(t_seg, s_seg, penalty).values)
            floor = max(1e-12, 1e-3 * float(np.max(level)))
            weights = 1.0 / np.maximum(level, floor) ** 2
        part = smooth_and_differentiate(t_seg, s_seg, penalty, weights)
        values[start:stop] = part.values
        derivatives[start:stop] = part.derivatives
        rss_total += part.noise_var_hat * max(size - part.dof, 1e-8)
        dof_total += part.dof
        deriv_var_acc += size * part.derivative_var_hat
        penalties.append(part.penalty)
        start = stop
    noise_var = rss_total / max(times.shape[0] - dof_total, 1e-8)
    return SmoothedSeries(
        values=values,
        derivatives=derivatives,
        noise_var_hat=float(noise_var),
        penalty=float(np.mean(penalties)),
        dof=float(dof_total),
        derivative_var_hat=float(deriv_var_acc / times.shape[0]),
    )


def finite_difference(times, samples, order: int = 1, axis: int = 0) -> np.ndarray:
    """Second-order finite differences on a uniform grid.

    Central stencils in the interior; one-sided second-order stencils at the
    boundaries.  ``samples`` may be multi-dimensional; ``axis`` selects the
    direction matching ``times``.
    """
    times = np.asarray(times, dtype=float).ravel()
    samples = np.asarray(samples, dtype=float)
    f = np.moveaxis(samples, axis, 0)
    m = times.shape[0]
    if f.shape[0] != m:
        raise ValidationError("samples do not match the grid length")
    if m < 3:
        raise ValidationError("finite differences need at least 3 points")
    steps = np.diff(times)
    h = steps[0]
    if np.any(np.abs(steps - h) > 1e-9 * abs(h)):
        raise UnsupportedGridError("finite differences require a uniform grid")

    out = np.empty_like(f)
    if order == 1:
        out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
        out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    elif order == 2:
        out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
        if m >= 4:
            out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
            out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
        else:
            out[0] = out[1]
            out[-1] = out[1]
    else:
        raise ValidationError("order must be 1 or 2")
    return np.moveaxis(out, 0, axis)
