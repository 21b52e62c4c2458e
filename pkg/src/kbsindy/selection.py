"""Hyperparameter selection: degrees of freedom, BIC, and grid searches.

The effective degrees of freedom of a fit are the trace of the hat matrix
K(K + eta^2 I)^{-1} plus the number of nonzero parametric coefficients; BIC
scores a fit as ||y - yhat||^2 + eta^2 log(m) dof (natural log).  Searches
evaluate the kernel-weighted sparse fit on a Cartesian grid of (lambda,
kernel hyperparameters), either minimizing BIC or maximizing the prediction
fit on a held-out validation block.

Within one kernel hyperparameter point the weight matrix A is fixed, so its
factorization, the whitened regressors and the dof trace are shared across
the whole lambda scan.
"""

import itertools
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg
from scipy.spatial.distance import cdist

from . import _linalg
from .data import Dataset, prediction_fit
from .errors import ConfigError, ShapeError, ValidationError
from .kernels import GaussianKernel, GramMatrix, PolynomialSumKernel, _mirror_upper
from .library import MonomialLibrary, build_theta
from .regression import (
    DEFAULT_MAX_ITER,
    ModelEstimate,
    _threshold_loop,
    sindy,
)

STRATEGIES = ("bic", "holdout")


@dataclass(frozen=True)
class SearchSpace:
    """Grids for the sparsity parameter and the kernel hyperparameters.

    ``kernel_grids`` maps hyperparameter names to value lists: ``scale`` and
    ``width`` for the Gaussian family, ``scale_<order>`` per order for
    polynomial sums.  Scale grids may contain 0 (kernel off); width grids
    must not.
    """

    lambda_grid: tuple
    kernel_grids: dict
    strategy: str = "bic"

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lambda_grid)
        if not lam or any(v < 0 for v in lam):
            raise ConfigError("lambda grid must be nonempty and nonnegative")
        grids = {k: tuple(float(v) for v in vs) for k, vs in self.kernel_grids.items()}
        for name, values in grids.items():
            if not values:
                raise ConfigError(f"kernel grid {name!r} is empty")
            if name == "width" and any(v <= 0 for v in values):
                raise ConfigError("width grid must be strictly positive")
            if name != "width" and any(v < 0 for v in values):
                raise ConfigError(f"kernel grid {name!r} has negative entries")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}")
        object.__setattr__(self, "lambda_grid", lam)
        object.__setattr__(self, "kernel_grids", grids)


def degrees_of_freedom(gram: GramMatrix, noise_var: float, support_size: int) -> float:
    """trace(K (K + noise_var I)^{-1}) plus the parametric support size."""
    if noise_var <= 0:
        raise ValidationError("noise variance must be positive")
    if gram.is_zero:
        return float(support_size)
    m = gram.m
    A = gram.matrix + noise_var * np.eye(m)
    L = _linalg.cholesky_spd(A)
    return m - noise_var * _linalg.trace_inverse(L) + support_size


def bic_score(y, y_hat, noise_var_hat: float, dof: float, m: int) -> float:
    """||y - y_hat||^2 + noise_var_hat * log(m) * dof (lower is better)."""
    if m < 2:
        raise ValidationError("BIC needs at least two samples")
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    rss = float(np.sum((y - y_hat) ** 2))
    return rss + noise_var_hat * np.log(m) * dof


def _expand_kernel_family(kernel_family):
    """Normalize the family tag to (tag, orders, grid-parameter names)."""
    if isinstance(kernel_family, str):
        kernel_family = {"family": kernel_family}
    family = kernel_family["family"]
    if family == "gaussian":
        return "gaussian", None, ("scale", "width")
    if family == "poly":
        orders = tuple(int(j) for j in kernel_family["orders"])
        if not orders:
            raise ConfigError("polynomial family needs at least one order")
        return "poly", orders, tuple(f"scale_{j}" for j in orders)
    raise ConfigError(f"unknown kernel family {family!r}")


def _make_spec(family, orders, names, values):
    point = dict(zip(names, values))
    if family == "gaussian":
        return GaussianKernel(scale=point["scale"], width=point["width"])
    return PolynomialSumKernel(
        orders=orders, scales=tuple(point[f"scale_{j}"] for j in orders)
    )


class _GramCache:
    """Reusable pieces of the Gram/cross matrices across a hyperparameter grid."""

    def __init__(self, family, anchors, query=None):
        self.family = family
        self.anchors = anchors
        self.query = query
        self._train = {}
        self._cross = {}
        if family == "gaussian":
            self._sq_train = _mirror_upper(cdist(anchors, anchors, "sqeuclidean"))
            if query is not None:
                self._sq_cross = cdist(query, anchors, "sqeuclidean")
        else:
            self._ip_train = _mirror_upper(anchors @ anchors.T)
            if query is not None:
                self._ip_cross = query @ anchors.T

    def _base(self, key, train):
        store = self._train if train else self._cross
        if key not in store:
            if self.family == "gaussian":
                sq = self._sq_train if train else self._sq_cross
                store[key] = np.exp(-sq / key)
            else:
                ip = self._ip_train if train else self._ip_cross
                store[key] = ip**key
        return store[key]

    def gram(self, spec) -> GramMatrix:
        K = self._combine(spec, train=True)
        return GramMatrix(matrix=K, anchors=self.anchors)

    def cross(self, spec) -> np.ndarray:
        return self._combine(spec, train=False)

    def _combine(self, spec, train):
        shape = (
            (self.anchors.shape[0], self.anchors.shape[0])
            if train
            else (self.query.shape[0], self.anchors.shape[0])
        )
        if spec.is_off:
            return np.zeros(shape)
        if self.family == "gaussian":
            return spec.scale * self._base(spec.width, train)
        K = np.zeros(shape)
        for j, s in zip(spec.orders, spec.scales):
            if s != 0.0:
                K += s * self._base(j, train)
        return K


def _scan_lambdas(theta, y, gram, noise_var, lambdas, max_iter):
    """Fit every lambda at one kernel point, sharing the A factorization.

    Yields (lam, model, dof, y_hat_train).
    """
    m = theta.shape[0]
    if gram.is_zero:
        for lam in lambdas:
            sol = sindy(theta, y, lam, max_iter)
            xi_kernel = (y - theta @ sol.xi_parametric) / noise_var
            model = ModelEstimate(
                library=None,
                xi_parametric=sol.xi_parametric,
                kernel=None,
                anchors=gram.anchors,
                xi_kernel=xi_kernel,
                noise_var=noise_var,
                lam=lam,
                iterations=sol.iterations,
                converged=sol.converged,
            )
            yield lam, model, float(sol.nnz), theta @ sol.xi_parametric
        return

    A = gram.matrix + noise_var * np.eye(m)
    L = _linalg.cholesky_spd(A)
    theta_w = scipy.linalg.solve_triangular(L, theta, lower=True)
    y_w = scipy.linalg.solve_triangular(L, y, lower=True)
    dof_trace = m - noise_var * _linalg.trace_inverse(L)

    def solve(support):
        return _linalg.lstsq_minnorm(theta_w[:, list(support)], y_w)

    for lam in lambdas:
        xi, support, iterations, converged = _threshold_loop(
            solve, theta.shape[1], lam, max_iter
        )
        xi_kernel = _linalg.chol_solve(L, y - theta @ xi, refine_with=A)
        model = ModelEstimate(
            library=None,
            xi_parametric=xi,
            kernel=None,
            anchors=gram.anchors,
            xi_kernel=xi_kernel,
            noise_var=noise_var,
            lam=lam,
            iterations=iterations,
            converged=converged,
        )
        y_hat = theta @ xi + gram.matrix @ xi_kernel
        yield lam, model, dof_trace + len(support), y_hat


def grid_search(
    train: Dataset,
    space: SearchSpace,
    library: MonomialLibrary,
    kernel_family,
    noise_var: float,
    validation: Dataset | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
):
    """Evaluate the kernel-weighted sparse fit over the whole grid.

    Returns (best ModelEstimate, score table).  The score table is a list of
    dict rows, one per grid point, holding the hyperparameters, BIC,
    validation fit (when a validation set is given), dof, nnz and rss.  The
    winner minimizes BIC or maximizes validation fit per the strategy; ties
    break toward smaller dof, then larger lambda, then smaller kernel
    scales, then grid order.
    """
    if space.strategy == "holdout" and validation is None:
        raise ConfigError("holdout selection requires a validation dataset")
    family, orders, names = _expand_kernel_family(kernel_family)
    for name in names:
        if name not in space.kernel_grids:
            raise ConfigError(f"kernel grid {name!r} missing from the search space")

    anchors = train.aux
    have_kernel_on = any(
        any(v != 0.0 for v in space.kernel_grids[n]) for n in names if n != "width"
    )
    if anchors is None:
        if have_kernel_on:
            raise ConfigError("kernel grids are active but the dataset has no aux")
        anchors = train.times[:, None]
    query = validation.aux if (validation is not None and validation.aux is not None) else None
    cache = _GramCache(family, anchors, query)

    theta = build_theta(library, train.states)
    y = train.targets
    theta_val = y_val = None
    if validation is not None:
        theta_val = build_theta(library, validation.states)
        y_val = validation.targets

    m = train.m
    rows = []
    models = []
    off_cache = None
    for values in itertools.product(*(space.kernel_grids[n] for n in names)):
        spec = _make_spec(family, orders, names, values)
        scales = tuple(v for n, v in zip(names, values) if n != "width")
        if spec.is_off and off_cache is not None:
            for lam, model, dof, y_hat, fit_val in off_cache:
                rows.append(
                    _score_row(names, values, scales, lam, y, y_hat, noise_var, dof, model, fit_val, m)
                )
                models.append(model)
            continue

        gram = cache.gram(spec)
        cross = None
        if validation is not None and not spec.is_off:
            if query is None:
                raise ConfigError("validation dataset lacks the aux columns")
            cross = cache.cross(spec)
        results = []
        for lam, model, dof, y_hat in _scan_lambdas(
            theta, y, gram, noise_var, space.lambda_grid, max_iter
        ):
            model = replace(model, library=library, kernel=spec, dof=float(dof))
            fit_val = None
            if validation is not None:
                y_hat_val = theta_val @ model.xi_parametric
                if cross is not None:
                    y_hat_val = y_hat_val + cross @ model.xi_kernel
                fit_val = prediction_fit(y_val, y_hat_val)
            results.append((lam, model, dof, y_hat, fit_val))
            rows.append(
                _score_row(names, values, scales, lam, y, y_hat, noise_var, dof, model, fit_val, m)
            )
            models.append(model)
        if spec.is_off:
            off_cache = results

    best_index = min(range(len(rows)), key=lambda i: _selection_key(rows[i], space.strategy, i))
    return models[best_index], rows


def _score_row(names, values, scales, lam, y, y_hat, noise_var, dof, model, fit_val, m):
    row = {"lambda": float(lam)}
    row.update({n: float(v) for n, v in zip(names, values)})
    row["rss"] = float(np.sum((y - y_hat) ** 2))
    row["bic"] = bic_score(y, y_hat, noise_var, dof, m)
    row["validation_fit"] = None if fit_val is None else float(fit_val)
    row["dof"] = float(dof)
    row["nnz"] = int(model.nnz)
    row["_scales"] = scales
    return row


def _selection_key(row, strategy, index):
    score = row["bic"] if strategy == "bic" else -row["validation_fit"]
    return (score, row["dof"], -row["lambda"], row["_scales"], index)


def two_stage_search(
    train: Dataset,
    validation: Dataset | None,
    space: SearchSpace,
    library: MonomialLibrary,
    kernel_family,
    noise_var: float,
    max_iter: int = DEFAULT_MAX_ITER,
):
    """Kernel hyperparameters first (sparsity off), then the lambda scan.

    Stage 1 fixes lambda = 0 and searches the kernel grids; stage 2 freezes
    the stage-1 kernel point and scans the lambda grid.  Returns the final
    model and the concatenated score table (rows tagged with their stage).
    """
    stage1 = SearchSpace(
        lambda_grid=(0.0,), kernel_grids=space.kernel_grids, strategy=space.strategy
    )
    model1, rows1 = grid_search(
        train, stage1, library, kernel_family, noise_var, validation, max_iter
    )
    if isinstance(model1.kernel, GaussianKernel):
        fixed = {"scale": (model1.kernel.scale,), "width": (model1.kernel.width,)}
    elif isinstance(model1.kernel, PolynomialSumKernel):
        fixed = {
            f"scale_{j}": (s,) for j, s in zip(model1.kernel.orders, model1.kernel.scales)
        }
    else:
        raise ConfigError("stage 1 did not produce a kernel point")
    stage2 = SearchSpace(
        lambda_grid=space.lambda_grid, kernel_grids=fixed, strategy=space.strategy
    )
    model2, rows2 = grid_search(
        train, stage2, library, kernel_family, noise_var, validation, max_iter
    )
    table = [{"stage": 1, **r} for r in rows1] + [{"stage": 2, **r} for r in rows2]
    return model2, table
