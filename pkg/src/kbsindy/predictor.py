"""Evaluate a fitted model at arbitrary points.

The prediction is the parametric sum over library monomials plus the kernel
expansion centered on the training anchors; the two pieces can also be
queried separately.
"""

import numpy as np

from .errors import ShapeError
from .kernels import _as_points
from .library import build_theta
from .regression import ModelEstimate


def kernel_component(model: ModelEstimate, z_points) -> np.ndarray:
    """Kernel expansion sum_i xi_i K(z, z_i) at each row of z_points."""
    z_points = _as_points(z_points)
    if model.kernel is None or model.anchors is None or model.xi_kernel is None:
        return np.zeros(z_points.shape[0])
    if z_points.shape[1] != model.anchors.shape[1]:
        raise ShapeError("query points do not match the anchor dimension")
    if model.kernel.is_off:
        return np.zeros(z_points.shape[0])
    return model.kernel.pairwise(z_points, model.anchors) @ model.xi_kernel


def parametric_component(model: ModelEstimate, states) -> np.ndarray:
    """Library part sum_j xi_j phi_j(x) at each state row."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if model.library is None:
        if np.any(model.xi_parametric):
            raise ShapeError("model has parametric coefficients but no library")
        return np.zeros(states.shape[0])
    return build_theta(model.library, states) @ model.xi_parametric


def predict_h(model: ModelEstimate, z) -> float:
    """Nonparametric part at a single point z."""
    return float(kernel_component(model, z)[0])


def predict_f(model: ModelEstimate, x, z) -> float:
    """Full prediction g(x) + h(z) at a single (x, z) pair."""
    return float(parametric_component(model, x)[0] + kernel_component(model, z)[0])


def predict_batch(model: ModelEstimate, states, aux=None) -> np.ndarray:
    """Row-wise predictions for an (M, n) state block and (M, d) aux block."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    out = parametric_component(model, states)
    if aux is not None:
        aux = _as_points(aux)
        if aux.shape[0] != states.shape[0]:
            raise ShapeError("states and aux disagree on the number of rows")
        out = out + kernel_component(model, aux)
    return out
