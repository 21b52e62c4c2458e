"""Kernels for the nonparametric component and their Gram matrices.

Two families are supported:

* Gaussian: scale * exp(-||za - zb||^2 / width).  Universal; scale 0 turns
  the kernel off.
* Homogeneous polynomial sums: sum_j theta_j (za . zb)^j over a set of
  orders.  Each order-j term implicitly contains every degree-j monomial of
  z with its multinomial multiplicity, so fitted kernel weights can be
  unfolded back into explicit monomial coefficients.

Several nonparametric components can be combined by summing the Gram
matrices built from their own kernels and anchor columns.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ShapeError, ValidationError
from .library import Monomial, monomial_weight


def _as_points(z):
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    return z


def _mirror_upper(K):
    """Exact symmetry: copy the upper triangle onto the lower one."""
    upper = np.triu(K)
    return upper + np.triu(K, 1).T


@dataclass(frozen=True)
class GaussianKernel:
    """scale * exp(-||za - zb||^2 / width)."""

    scale: float
    width: float

    def __post_init__(self):
        if self.width <= 0:
            raise ValidationError("Gaussian width must be positive")
        if self.scale < 0:
            raise ValidationError("kernel scale must be nonnegative")

    @property
    def is_off(self) -> bool:
        return self.scale == 0.0

    def pairwise(self, za, zb) -> np.ndarray:
        za, zb = _as_points(za), _as_points(zb)
        if za.shape[1] != zb.shape[1]:
            raise ShapeError("kernel arguments have different dimensions")
        if self.scale == 0.0:
            return np.zeros((za.shape[0], zb.shape[0]))
        sq = cdist(za, zb, "sqeuclidean")
        return self.scale * np.exp(-sq / self.width)

    def to_dict(self) -> dict:
        return {"family": "gaussian", "scale": self.scale, "width": self.width}


@dataclass(frozen=True)
class PolynomialSumKernel:
    """sum_j scales[j] * (za . zb)^orders[j] over homogeneous orders."""

    orders: tuple
    scales: tuple

    def __post_init__(self):
        orders = tuple(int(j) for j in self.orders)
        scales = tuple(float(s) for s in self.scales)
        if len(orders) != len(scales) or not orders:
            raise ValidationError("orders and scales must be equal-length, nonempty")
        if any(j < 1 for j in orders):
            raise ValidationError("polynomial orders must be >= 1")
        if len(set(orders)) != len(orders):
            raise ValidationError("polynomial orders must be distinct")
        if any(s < 0 for s in scales):
            raise ValidationError("kernel scales must be nonnegative")
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "scales", scales)

    @property
    def is_off(self) -> bool:
        return all(s == 0.0 for s in self.scales)

    def pairwise(self, za, zb) -> np.ndarray:
        za, zb = _as_points(za), _as_points(zb)
        if za.shape[1] != zb.shape[1]:
            raise ShapeError("kernel arguments have different dimensions")
        inner = za @ zb.T
        K = np.zeros_like(inner)
        for j, s in zip(self.orders, self.scales):
            if s != 0.0:
                K += s * inner**j
        return K

    def to_dict(self) -> dict:
        return {
            "family": "poly",
            "orders": list(self.orders),
            "scales": list(self.scales),
        }


def kernel_from_dict(spec: dict):
    family = spec["family"]
    if family == "gaussian":
        return GaussianKernel(scale=spec["scale"], width=spec["width"])
    if family == "poly":
        return PolynomialSumKernel(orders=tuple(spec["orders"]), scales=tuple(spec["scales"]))
    raise ValidationError(f"unknown kernel family {family!r}")


def eval_kernel(spec, z_a, z_b) -> float:
    """Kernel value for a single pair of points."""
    return float(spec.pairwise(z_a, z_b)[0, 0])


@dataclass(frozen=True)
class GramMatrix:
    """m x m kernel matrix together with the anchor points that built it."""

    matrix: np.ndarray
    anchors: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        anchors = _as_points(self.anchors)
        if matrix.shape != (anchors.shape[0], anchors.shape[0]):
            raise ShapeError("Gram matrix and anchors disagree on m")
        if not np.array_equal(matrix, matrix.T):
            raise ValidationError("Gram matrix must be exactly symmetric")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "anchors", anchors)

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.matrix)


def build_gram(spec, anchors) -> GramMatrix:
    """Gram matrix of the kernel on the anchor rows, exactly symmetric."""
    anchors = _as_points(anchors)
    if not np.all(np.isfinite(anchors)):
        raise ValidationError("anchors contain non-finite entries")
    if spec.is_off:
        K = np.zeros((anchors.shape[0], anchors.shape[0]))
    else:
        K = _mirror_upper(spec.pairwise(anchors, anchors))
    return GramMatrix(matrix=K, anchors=anchors)


def extract_monomial_coefficients(spec, anchors, xi) -> dict:
    """Unfold a fitted polynomial-kernel component into monomial coefficients.

    For each order j in the kernel and each distinct monomial h of degree j,
    the coefficient is w * theta_j * sum_i xi_i h(z_i) with w the multinomial
    multiplicity; summing coefficient * monomial(z) over all entries
    reproduces the kernel part of the prediction at any z.

    Returns a dict mapping :class:`Monomial` to its coefficient.
    """
    if not isinstance(spec, PolynomialSumKernel):
        raise ValidationError("monomial extraction requires a polynomial kernel")
    anchors = _as_points(anchors)
    xi = np.asarray(xi, dtype=float).ravel()
    if xi.shape[0] != anchors.shape[0]:
        raise ShapeError("xi length does not match the anchor count")
    d = anchors.shape[1]
    coefficients = {}
    for j, theta in zip(spec.orders, spec.scales):
        for combo in itertools.combinations_with_replacement(range(d), j):
            exps = [0] * d
            for var in combo:
                exps[var] += 1
            mono = Monomial(tuple(exps))
            values = mono.evaluate(anchors)
            w = monomial_weight(mono.exponents)
            coefficients[mono] = float(w * theta * (values @ xi))
    return coefficients
