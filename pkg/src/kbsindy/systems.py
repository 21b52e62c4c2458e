"""Seedable simulators for the benchmark systems.

Every simulator returns a :class:`SimulatedExperiment` bundling the noisy
:class:`~kbsindy.data.Dataset`, the injected target-noise variance, and a
``truth`` dict with the clean targets, the true sparse coefficients (keyed
by monomial name) and whatever nonlinearity the system carries.

Randomness comes from numpy's counter-based Philox 4x64-10 generator seeded
with a single integer, so identical seeds give bit-identical datasets.  The
draw order inside each simulator is fixed and documented in its docstring.
Continuous-time systems are integrated with fixed-step RK4.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .data import Dataset
from .errors import ConfigError, IntegrationError, ValidationError
from .smoothing import finite_difference

LORENZ_PARAMS = (10.0, 28.0, 8.0 / 3.0)


def _rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class NoiseSpec:
    """Target-noise description: SNR-scaled or CV-scaled Gaussian, or none."""

    kind: str  # "snr" | "cv" | "none"
    snr: float | None = None
    cv: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("snr", "cv", "none"):
            raise ValidationError(f"unknown noise kind {self.kind!r}")
        if self.kind == "snr" and (self.snr is None or self.snr <= 0):
            raise ValidationError("snr noise requires snr > 0")
        if self.kind == "cv" and (self.cv is None or self.cv < 0):
            raise ValidationError("cv noise requires cv >= 0")

    def to_dict(self):
        out = {"kind": self.kind, "seed": int(self.seed)}
        if self.snr is not None:
            out["snr"] = float(self.snr)
        if self.cv is not None:
            out["cv"] = float(self.cv)
        return out


def noise_from_dict(spec):
    return NoiseSpec(
        kind=spec["kind"],
        snr=spec.get("snr"),
        cv=spec.get("cv"),
        seed=spec.get("seed", 0),
    )


@dataclass(frozen=True)
class HFunction:
    """Analytic nonlinearity used by the simulators, tag-dispatched.

    Kinds: ``tanh`` and ``sine`` (scaled), ``hill`` (s1, S, q),
    ``rational`` (quartic-over-quartic in z), ``mean_tanh`` (tanh of the
    mean of a multivariate z), ``zero``.
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        p = self.params
        if self.kind == "zero":
            return np.zeros(z.shape[:-1]) if z.ndim > 1 else np.zeros_like(z)
        if self.kind == "tanh":
            return p.get("scale", 1.0) * np.tanh(z)
        if self.kind == "sine":
            return p.get("scale", 1.0) * np.sin(z)
        if self.kind == "hill":
            return p["s1"] / (1.0 + (z / p["S"]) ** p["q"])
        if self.kind == "rational":
            num = p["num4"] * z**4 + p["num2"] * z**2 + p["num0"]
            den = p["den4"] * z**4 + p["den2"] * z**2 + p["den0"]
            return num / den
        if self.kind == "mean_tanh":
            return p.get("scale", 1.0) * np.tanh(np.mean(z, axis=-1))
        raise ValidationError(f"unknown h kind {self.kind!r}")

    def to_dict(self):
        return {"kind": self.kind, **self.params}


def h_from_dict(spec):
    if spec is None:
        return None
    spec = dict(spec)
    return HFunction(kind=spec.pop("kind"), params=spec)


@dataclass(frozen=True)
class SimulatedExperiment:
    """A dataset plus the ground truth and injected noise level behind it."""

    dataset: Dataset
    noise_var: float
    truth: dict
    params: dict


def _snr_noise(y_clean, snr, rng):
    var = float(np.var(y_clean)) / float(snr)
    return y_clean + np.sqrt(var) * rng.standard_normal(y_clean.shape[0]), var


def _rk4_path(rhs, x0, dt, n_steps, record_every):
    """Fixed-step RK4; records the state every ``record_every`` steps
    (step 0 included).  Raises IntegrationError on non-finite states."""
    x = np.asarray(x0, dtype=float).copy()
    n_rec = n_steps // record_every + 1
    states = np.empty((n_rec, x.shape[0]))
    times = np.empty(n_rec)
    states[0], times[0] = x, 0.0
    rec = 1
    for step in range(1, n_steps + 1):
        t = (step - 1) * dt
        k1 = rhs(t, x)
        k2 = rhs(t + dt / 2, x + dt / 2 * k1)
        k3 = rhs(t + dt / 2, x + dt / 2 * k2)
        k4 = rhs(t + dt, x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % record_every == 0:
            if not np.all(np.isfinite(x)):
                raise IntegrationError(f"state blew up at step {step}", step=step)
            states[rec] = x
            times[rec] = step * dt
            rec += 1
    return times, states


# Lorenz -------------------------------------------------------------------


def lorenz_rhs(x, params=LORENZ_PARAMS, forcing=0.0):
    """Lorenz vector field with an additive forcing term on equation 2."""
    sigma, rho, beta = params
    return np.array(
        [
            sigma * (x[1] - x[0]),
            x[0] * (rho - x[2]) - x[1] + forcing,
            x[0] * x[1] - beta * x[2],
        ]
    )


def lorenz_true_coefficients(equation, params=LORENZ_PARAMS, offset=0, n=3):
    """Sparse coefficients of one Lorenz equation, keyed by monomial name.

    ``offset`` shifts the variable indices (for stacked copies); ``n`` is the
    total state dimension used for naming.
    """
    sigma, rho, beta = params
    i1, i2, i3 = offset + 1, offset + 2, offset + 3
    if equation == 1:
        return {f"x{i1}": -sigma, f"x{i2}": sigma}
    if equation == 2:
        return {f"x{i1}": rho, f"x{i2}": -1.0, f"x{i1}*x{i3}": -1.0}
    if equation == 3:
        return {f"x{i1}*x{i2}": 1.0, f"x{i3}": -beta}
    raise ValidationError("equation must be 1, 2 or 3")


def simulate_lorenz(
    params=LORENZ_PARAMS,
    h: HFunction | None = None,
    h_target: str = "input",
    equation: int = 2,
    x0=(-8.0, 8.0, 27.0),
    dt: float = 0.001,
    stride: int = 10,
    samples: int = 1000,
    noise: NoiseSpec = NoiseSpec("snr", snr=60.0),
    input_interval: float = 0.1,
    input_range=(-3.0, 3.0),
) -> SimulatedExperiment:
    """Lorenz system, optionally forced through h on equation 2.

    ``h_target`` selects what h acts on and what the aux column carries:
    ``input`` (scalar u, piecewise constant over ``input_interval`` and
    uniform over ``input_range``), ``output`` (o = x1+x2+x3 feedback), or
    ``inputs10`` (ten independent such inputs).  Targets are the exact
    derivatives of the chosen equation plus SNR-scaled noise.

    Draw order: input segment values, then target noise.
    """
    if dt <= 0 or samples < 1 or stride < 1:
        raise ValidationError("dt, stride and samples must be positive")
    rng = _rng(noise.seed)
    n_steps = (samples - 1) * stride
    t_end = n_steps * dt
    h_fn = h if h is not None else HFunction("zero")

    n_inputs = {"input": 1, "output": 0, "inputs10": 10}.get(h_target)
    if n_inputs is None:
        raise ValidationError(f"unknown h_target {h_target!r}")
    if n_inputs:
        n_seg = int(np.floor(t_end / input_interval + 1e-9)) + 1
        segments = rng.uniform(*input_range, size=(n_seg, n_inputs))

        def z_at(t, x):
            return segments[min(int(t / input_interval + 1e-12), n_seg - 1)]

    else:

        def z_at(t, x):
            return np.array([x[0] + x[1] + x[2]])

    def forcing(t, x):
        z = z_at(t, x)
        if h is None:
            return 0.0
        return float(h_fn(z if n_inputs != 1 else z[0]))

    def rhs(t, x):
        return lorenz_rhs(x, params, forcing(t, x))

    times, states = _rk4_path(rhs, x0, dt, n_steps, stride)
    aux = np.array([z_at(t, x) for t, x in zip(times, states)])
    y_clean = np.array(
        [rhs(t, x)[equation - 1] for t, x in zip(times, states)]
    )
    if noise.kind == "snr":
        targets, noise_var = _snr_noise(y_clean, noise.snr, rng)
    else:
        targets, noise_var = y_clean.copy(), 0.0

    truth = {
        "coefficients": lorenz_true_coefficients(equation, params),
        "h": h_fn if (h is not None and equation == 2) else HFunction("zero"),
        "targets_clean": y_clean,
        "state_names": ["x1", "x2", "x3"],
    }
    sim_params = {
        "system": "lorenz",
        "params": list(params),
        "h": None if h is None else h_fn.to_dict(),
        "h_target": h_target,
        "equation": equation,
        "x0": list(x0),
        "dt": dt,
        "stride": stride,
        "samples": samples,
        "noise": noise.to_dict(),
        "input_interval": input_interval,
        "input_range": list(input_range),
    }
    dataset = Dataset(times=times, states=states, targets=targets, aux=aux)
    return SimulatedExperiment(dataset, noise_var, truth, sim_params)


def simulate_stacked_lorenz(
    params=LORENZ_PARAMS,
    copies: int = 4,
    equation: int = 2,
    x0=None,
    dt: float = 0.001,
    stride: int = 5,
    samples: int = 2000,
    noise: NoiseSpec = NoiseSpec("snr", snr=60.0),
    ic_spread: float = 4.0,
) -> SimulatedExperiment:
    """Several decoupled Lorenz systems integrated as one state vector.

    Initial conditions are drawn uniformly in a box of half-width
    ``ic_spread`` around (-8, 8, 27) per copy unless given.  Targets come
    from the derivative of state ``equation`` (1-based, within the stacked
    vector); aux carries the full state for the polynomial kernels.

    Draw order: initial conditions, then target noise.
    """
    rng = _rng(noise.seed)
    dim = 3 * copies
    if x0 is None:
        base = np.tile([-8.0, 8.0, 27.0], copies)
        x0 = base + rng.uniform(-ic_spread, ic_spread, size=dim)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape[0] != dim:
        raise ValidationError("x0 length must be 3 * copies")

    def rhs(t, x):
        out = np.empty(dim)
        for c in range(copies):
            out[3 * c : 3 * c + 3] = lorenz_rhs(x[3 * c : 3 * c + 3], params)
        return out

    n_steps = (samples - 1) * stride
    times, states = _rk4_path(rhs, x0, dt, n_steps, stride)
    y_clean = np.array([rhs(t, x)[equation - 1] for t, x in zip(times, states)])
    if noise.kind == "snr":
        targets, noise_var = _snr_noise(y_clean, noise.snr, rng)
    else:
        targets, noise_var = y_clean.copy(), 0.0

    copy_index, eq_within = divmod(equation - 1, 3)
    truth = {
        "coefficients": lorenz_true_coefficients(
            eq_within + 1, params, offset=3 * copy_index, n=dim
        ),
        "targets_clean": y_clean,
        "state_names": [f"x{i + 1}" for i in range(dim)],
    }
    sim_params = {
        "system": "stacked_lorenz",
        "params": list(params),
        "copies": copies,
        "equation": equation,
        "x0": [float(v) for v in x0],
        "dt": dt,
        "stride": stride,
        "samples": samples,
        "noise": noise.to_dict(),
    }
    dataset = Dataset(times=times, states=states, targets=targets, aux=states)
    return SimulatedExperiment(dataset, noise_var, truth, sim_params)


# Gene autoregulation ------------------------------------------------------


def gene_rhs(x, params, h: HFunction):
    """mRNA/protein autoregulation vector field."""
    x1, x2 = x
    return np.array(
        [
            -params["delta1"] * x1 + float(h(x2)),
            params["gamma"] * x1 - params["delta2"] * x2,
        ]
    )


def simulate_gene(
    params,
    h: HFunction,
    x0,
    schedule=((100, 0.5), (500, 2.0)),
    noise: NoiseSpec = NoiseSpec("cv", cv=0.05),
    dt: float = 0.05,
) -> SimulatedExperiment:
    """Two-state gene autoregulation with two-regime sampling.

    ``schedule`` lists (sample count, sampling interval) blocks; sampling
    times are the cumulative grid starting at t=0.  States in the returned
    dataset carry multiplicative CV noise (noise sd proportional to the
    current value); targets hold the exact mRNA derivative, since for this
    system derivatives are meant to be re-estimated by smoothing.

    Draw order: state noise for x1, then for x2.
    """
    for key in ("delta1", "delta2", "gamma"):
        if params[key] <= 0:
            raise ValidationError(f"rate {key} must be positive")
    rng = _rng(noise.seed)

    sample_times = []
    cursor = 0.0
    for count, interval in schedule:
        if abs(interval / dt - round(interval / dt)) > 1e-9:
            raise ValidationError("sampling intervals must be multiples of dt")
        for _ in range(int(count)):
            sample_times.append(cursor)
            cursor += interval
    sample_times = np.asarray(sample_times)
    n_steps = int(round(sample_times[-1] / dt))

    def rhs(t, x):
        return gene_rhs(x, params, h)

    times, path = _rk4_path(rhs, x0, dt, n_steps, 1)
    if np.any(path < 0):
        raise IntegrationError("gene states went negative; reduce dt")
    idx = np.rint(sample_times / dt).astype(int)
    times = times[idx]
    clean = path[idx]
    y_clean = np.array([rhs(t, x)[0] for t, x in zip(times, clean)])

    cv = noise.cv if noise.kind == "cv" else 0.0
    noisy = clean.copy()
    for col in range(2):
        noisy[:, col] = clean[:, col] * (
            1.0 + cv * rng.standard_normal(clean.shape[0])
        )

    truth = {
        "coefficients": {"x1": -params["delta1"]},
        "h": h,
        "targets_clean": y_clean,
        "clean_states": clean,
        "state_names": ["x1", "x2"],
    }
    sim_params = {
        "system": "gene",
        "params": {k: float(v) for k, v in params.items()},
        "h": h.to_dict(),
        "x0": [float(v) for v in x0],
        "schedule": [[int(c), float(s)] for c, s in schedule],
        "noise": noise.to_dict(),
        "dt": dt,
    }
    dataset = Dataset(
        times=times, states=noisy, targets=y_clean, aux=noisy[:, 1:2]
    )
    return SimulatedExperiment(dataset, float("nan"), truth, sim_params)


def gene_steady_state(params, h: HFunction, bracket=(1e-9, 1e7)):
    """Fixed point of the autoregulation system, solved numerically."""

    def gap(x2):
        x1 = float(h(x2)) / params["delta1"]
        return params["gamma"] * x1 - params["delta2"] * x2

    x2_star = brentq(gap, *bracket)
    return np.array([float(h(x2_star)) / params["delta1"], x2_star])


# Calcium reaction-diffusion -----------------------------------------------

CALCIUM_PARAMS = {
    "v0": 1.0,
    "v1": 7.3,
    "beta": 0.4,
    "VM2": 65.0,
    "VM3": 500.0,
    "K2": 1.0,
    "KR": 2.0,
    "KA": 0.9,
    "kf": 1.0,
    "k": 10.0,
    "n": 2.0,
    "m": 2.0,
    "p": 4.0,
    "DZ": 20.0,
    "DY": 0.1,
}


def calcium_reaction(Z, Y, params=CALCIUM_PARAMS):
    """Reaction parts of the calcium model: (dZ/dt, dY/dt) without diffusion."""
    p = params
    v2 = p["VM2"] * Z ** p["n"] / (p["K2"] ** p["n"] + Z ** p["n"])
    v3 = (
        p["VM3"]
        * (Y ** p["m"] / (p["KR"] ** p["m"] + Y ** p["m"]))
        * (Z ** p["p"] / (p["KA"] ** p["p"] + Z ** p["p"]))
    )
    fZ = p["v0"] + p["v1"] * p["beta"] - v2 + v3 + p["kf"] * Y - p["k"] * Z
    gY = v2 - v3 - p["kf"] * Y
    return fZ, gY


def calcium_steady_state(params=CALCIUM_PARAMS):
    """Homogeneous steady state: Z* closed-form, Y* by bracketing."""
    p = params
    z_star = (p["v0"] + p["v1"] * p["beta"]) / p["k"]

    def gap(y):
        _, gY = calcium_reaction(z_star, y, params)
        return gY

    y_star = brentq(gap, 1e-9, 1e4)
    return z_star, y_star


def _laplacian_neumann(field, dx):
    """Central-difference 1-D Laplacian with zero-flux (mirror) boundaries."""
    padded = np.empty(field.shape[0] + 2)
    padded[1:-1] = field
    padded[0] = field[1]
    padded[-1] = field[-2]
    return (padded[2:] - 2 * field + padded[:-2]) / dx**2


def integrate_calcium(
    params=CALCIUM_PARAMS,
    cells: int = 400,
    dx: float = 0.5,
    t_end: float = 10.0,
    dt: float = 2e-3,
    record_every: int = 1,
    ic_amplitude: float = 0.05,
    ic_sites: int = 6,
    ic_seed: int = 0,
):
    """Method-of-lines integration of the calcium RDE.

    Zero-flux boundaries.  The initial condition is the homogeneous steady
    state perturbed by ``ic_sites`` smooth localized bumps with seeded
    random centers and strengths; the resulting waves collide and keep the
    spatial structure irregular over the run.  Returns
    (frame_times, Z_frames, Y_frames) with frames of shape (n_frames, cells).
    """
    p = params
    bound = 0.4 * dx**2 / (2.0 * max(p["DZ"], p["DY"]))
    if dt > bound:
        raise ConfigError(
            f"dt={dt} violates the diffusion stability bound {bound:.3e}"
        )
    z_star, y_star = calcium_steady_state(params)
    x_grid = np.arange(cells) * dx
    length = x_grid[-1]
    rng = _rng(ic_seed)
    centers = rng.uniform(0.05 * length, 0.95 * length, size=ic_sites)
    strengths = rng.uniform(0.5, 2.0, size=ic_sites)
    bump = np.zeros(cells)
    for center, strength in zip(centers, strengths):
        bump += strength * np.exp(-((x_grid - center) ** 2) / (2 * (0.02 * length) ** 2))
    Z = z_star * (1.0 + ic_amplitude * bump)
    Y = y_star * (1.0 + ic_amplitude * bump)

    def rhs(t, state):
        Z, Y = state
        fZ, gY = calcium_reaction(Z, Y, params)
        return np.stack(
            [
                p["DZ"] * _laplacian_neumann(Z, dx) + fZ,
                p["DY"] * _laplacian_neumann(Y, dx) + gY,
            ]
        )

    n_steps = int(round(t_end / dt))
    state = np.stack([Z, Y])
    n_frames = n_steps // record_every + 1
    frames_Z = np.empty((n_frames, cells))
    frames_Y = np.empty((n_frames, cells))
    frame_times = np.empty(n_frames)
    frames_Z[0], frames_Y[0], frame_times[0] = Z, Y, 0.0
    rec = 1
    for step in range(1, n_steps + 1):
        t = (step - 1) * dt
        k1 = rhs(t, state)
        k2 = rhs(t + dt / 2, state + dt / 2 * k1)
        k3 = rhs(t + dt / 2, state + dt / 2 * k2)
        k4 = rhs(t + dt, state + dt * k3)
        state = state + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if step % record_every == 0:
            if not np.all(np.isfinite(state)):
                raise IntegrationError(f"PDE state blew up at step {step}", step=step)
            frames_Z[rec], frames_Y[rec] = state
            frame_times[rec] = step * dt
            rec += 1
    return frame_times, frames_Z, frames_Y


def simulate_calcium_rde(
    params=CALCIUM_PARAMS,
    cells: int = 400,
    dx: float = 0.5,
    t_end: float = 10.0,
    dt: float = 2e-3,
    record_every: int = 1,
    transient: float = 0.3,
    samples: int = 2000,
    snr_space: float = 20.0,
    snr_time: float = 10.0,
    seed: int = 0,
    ic_sites: int = 6,
) -> SimulatedExperiment:
    """Space-time samples of the calcium RDE for the spatial regression.

    Rows are (frame, cell) pairs drawn without replacement from interior
    cells of frames past the transient.  The four state columns are the
    noisy spatial derivatives (dZ/dx, dY/dx, d2Z/dx2, d2Y/dx2); targets are
    the noisy dZ/dt; aux holds the clean (Z, Y).  The time column is a row
    index, since several samples share a frame; the actual (t, x) locations
    are recorded in the truth dict.

    Draw order: sample locations, then the four column noises, then target
    noise.
    """
    rng = _rng(seed)
    frame_times, Z, Y = integrate_calcium(
        params, cells, dx, t_end, dt, record_every, ic_sites=ic_sites, ic_seed=seed
    )
    valid = np.flatnonzero(frame_times >= transient)
    interior = np.arange(1, cells - 1)
    pool = valid.shape[0] * interior.shape[0]
    if samples > pool:
        raise ConfigError("more samples requested than interior grid points")
    picks = np.sort(rng.choice(pool, size=samples, replace=False))
    f_idx = valid[picks // interior.shape[0]]
    c_idx = interior[picks % interior.shape[0]]

    x_grid = np.arange(cells) * dx
    needed = np.unique(f_idx)
    dZdx = {f: finite_difference(x_grid, Z[f], order=1) for f in needed}
    dYdx = {f: finite_difference(x_grid, Y[f], order=1) for f in needed}
    d2Zdx2 = {f: finite_difference(x_grid, Z[f], order=2) for f in needed}
    d2Ydx2 = {f: finite_difference(x_grid, Y[f], order=2) for f in needed}

    cols = np.empty((samples, 4))
    aux = np.empty((samples, 2))
    y_clean = np.empty(samples)
    for i, (f, c) in enumerate(zip(f_idx, c_idx)):
        cols[i] = (dZdx[f][c], dYdx[f][c], d2Zdx2[f][c], d2Ydx2[f][c])
        aux[i] = (Z[f, c], Y[f, c])
        fZ, _ = calcium_reaction(Z[f, c], Y[f, c], params)
        y_clean[i] = params["DZ"] * d2Zdx2[f][c] + fZ

    noisy_cols = cols.copy()
    for j in range(4):
        var = float(np.var(cols[:, j])) / snr_space
        noisy_cols[:, j] = cols[:, j] + np.sqrt(var) * rng.standard_normal(samples)
    targets, noise_var = _snr_noise(y_clean, snr_time, rng)

    truth = {
        "coefficients": {"x3": params["DZ"]},
        "reaction": lambda z, y: calcium_reaction(z, y, params)[0],
        "targets_clean": y_clean,
        "state_names": ["dZ_dx", "dY_dx", "d2Z_dx2", "d2Y_dx2"],
        "sample_times": frame_times[f_idx],
        "sample_positions": x_grid[c_idx],
        "clean_columns": cols,
    }
    sim_params = {
        "system": "calcium",
        "params": {k: float(v) for k, v in params.items()},
        "cells": cells,
        "dx": dx,
        "t_end": t_end,
        "dt": dt,
        "record_every": record_every,
        "transient": transient,
        "samples": samples,
        "snr_space": snr_space,
        "snr_time": snr_time,
        "seed": int(seed),
    }
    dataset = Dataset(
        times=np.arange(samples, dtype=float),
        states=noisy_cols,
        targets=targets,
        aux=aux,
    )
    return SimulatedExperiment(dataset, noise_var, truth, sim_params)


# Logistic map with red noise ----------------------------------------------


def simulate_logistic_ar(
    r: float = 3.0,
    ar=(0.8, 0.05),
    x0: float = 0.5,
    steps: int = 200,
    noise: NoiseSpec = NoiseSpec("snr", snr=60.0),
) -> SimulatedExperiment:
    """Logistic map driven by AR(1) ("red") process noise.

    x_{k+1} = r x_k (1 - x_k) + e_k with e_{k+1} = a e_k + b w_k, e_0 = 0.
    States are the clean x_k; targets are x_{k+1} plus measurement noise at
    the requested SNR; aux is the time index k (the kernel's z variable).

    Draw order: the AR innovations w, then measurement noise.
    """
    if steps < 2:
        raise ValidationError("steps must be at least 2")
    a, b = ar
    rng = _rng(noise.seed)
    w = rng.standard_normal(steps)
    e = np.zeros(steps + 1)
    x = np.zeros(steps + 1)
    x[0] = x0
    for k in range(steps):
        x[k + 1] = r * x[k] * (1.0 - x[k]) + e[k]
        e[k + 1] = a * e[k] + b * w[k]
    y_clean = x[1:]
    if noise.kind == "snr":
        targets, noise_var = _snr_noise(y_clean, noise.snr, rng)
    else:
        targets, noise_var = y_clean.copy(), 0.0
    index = np.arange(steps, dtype=float)
    truth = {
        "coefficients": {"x1": r, "x1^2": -r},
        "h_series": e[:steps].copy(),
        "targets_clean": y_clean,
        "state_names": ["x1"],
    }
    sim_params = {
        "system": "logistic_ar",
        "r": float(r),
        "ar": [float(a), float(b)],
        "x0": float(x0),
        "steps": int(steps),
        "noise": noise.to_dict(),
    }
    dataset = Dataset(
        times=index, states=x[:steps, None], targets=targets, aux=index[:, None]
    )
    return SimulatedExperiment(dataset, noise_var, truth, sim_params)


# Nonlinear FIR --------------------------------------------------------------

NFIR_LINEAR = (1.0, 0.6, 0.35, 0.9, 0.35, 0.2, 0.2)


def nfir_true_coefficients(alpha):
    """Sparse coefficients of the NFIR benchmark over lag variables x1..x10."""
    coeffs = {"x1^4": 0.2}
    if alpha:
        for lag, c in enumerate(NFIR_LINEAR, start=1):
            coeffs[f"x{lag}"] = c
        coeffs.update(
            {
                "x1^2": 1.0,
                "x4^2": 0.25,
                "x1*x2": 0.25,
                "x1*x3": 0.5,
                "x2*x3": -1.0,
                "x2*x4": 0.5,
                "x3^3": 0.1,
            }
        )
    return coeffs


def simulate_nfir(
    alpha: int,
    steps: int = 1000,
    noise_sd: float = 0.5,
    memory: int = 10,
    seed: int = 0,
) -> SimulatedExperiment:
    """Nonlinear FIR benchmark with white unit-variance Gaussian input.

    States (and aux) are the lag vectors (u_{t-1}, ..., u_{t-memory}) with
    zero initial conditions; targets are the outputs, including the process
    noise term noise_sd * e_t.  ``alpha`` = 0 keeps only the quartic term
    0.2 u_{t-1}^4.

    Draw order: the input u, then the process noise e.
    """
    if steps <= memory:
        raise ValidationError("steps must exceed the memory for warm-up")
    rng = _rng(seed)
    u = rng.standard_normal(steps)
    e = rng.standard_normal(steps)
    upad = np.concatenate([np.zeros(memory), u])

    lags = np.empty((steps, memory))
    for j in range(1, memory + 1):
        lags[:, j - 1] = upad[memory - j : memory - j + steps]

    u1, u2, u3, u4 = lags[:, 0], lags[:, 1], lags[:, 2], lags[:, 3]
    u5, u6, u7 = lags[:, 4], lags[:, 5], lags[:, 6]
    linear = (
        u1 + 0.6 * u2 + 0.35 * u3 + 0.9 * u4 + 0.35 * u5 + 0.2 * u6 + 0.2 * u7
    )
    poly = (
        u1**2
        + 0.25 * u4**2
        + 0.25 * u1 * u2
        + 0.5 * u1 * u3
        - u2 * u3
        + 0.5 * u2 * u4
        + 0.1 * u3**3
    )
    y_clean = alpha * (linear + poly) + 0.2 * u1**4
    targets = y_clean + noise_sd * e
    times = np.arange(1, steps + 1, dtype=float)

    truth = {
        "coefficients": nfir_true_coefficients(alpha),
        "targets_clean": y_clean,
        "state_names": [f"u(t-{j})" for j in range(1, memory + 1)],
    }
    sim_params = {
        "system": "nfir",
        "alpha": int(alpha),
        "steps": int(steps),
        "noise_sd": float(noise_sd),
        "memory": int(memory),
        "seed": int(seed),
    }
    dataset = Dataset(times=times, states=lags, targets=targets, aux=lags)
    return SimulatedExperiment(
        dataset, float(noise_sd) ** 2, truth, sim_params
    )
