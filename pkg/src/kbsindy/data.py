"""Time-series datasets: ingestion, contiguous splitting, and the fit metric.

A :class:`Dataset` holds sampled states, optional auxiliary variables (the
inputs/outputs/time index the nonparametric component depends on) and the
regression targets (noisy derivatives or next-step values).  Arrays are
frozen after validation so datasets can be shared freely.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ParseError,
    SchemaError,
    ShapeError,
    UndefinedMetricError,
    ValidationError,
)

# Full-precision scientific notation: 17 significant digits, enough for a
# bit-exact float64 round-trip.
FLOAT_FORMAT = "{:.16e}"


def _freeze(arr):
    arr = np.ascontiguousarray(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Dataset:
    """Sampled trajectory data for one regression problem.

    times   : (m,) strictly increasing sample times
    states  : (m, n) state samples (columns of the parametric library)
    targets : (m,) regression targets y
    aux     : (m, d) variables the kernel component depends on, or None
    """

    times: np.ndarray
    states: np.ndarray
    targets: np.ndarray
    aux: np.ndarray | None = None

    def __post_init__(self):
        times = _freeze(np.atleast_1d(self.times))
        states = np.asarray(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        states = _freeze(states)
        targets = _freeze(np.atleast_1d(self.targets))
        aux = self.aux
        if aux is not None:
            aux = np.asarray(aux, dtype=float)
            if aux.ndim == 1:
                aux = aux[:, None]
            aux = _freeze(aux)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "aux", aux)
        self._validate()

    def _validate(self):
        m = self.times.shape[0]
        if m < 1:
            raise ValidationError("dataset must contain at least one row")
        if self.times.ndim != 1 or self.targets.ndim != 1:
            raise ShapeError("times and targets must be one-dimensional")
        if self.states.shape[0] != m or self.targets.shape[0] != m:
            raise ShapeError("row counts of times/states/targets differ")
        if self.aux is not None and self.aux.shape[0] != m:
            raise ShapeError("row counts of times/aux differ")
        for name, arr in (
            ("times", self.times),
            ("states", self.states),
            ("targets", self.targets),
        ):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite entries")
        if self.aux is not None and not np.all(np.isfinite(self.aux)):
            raise ValidationError("aux contains non-finite entries")
        if m > 1 and not np.all(np.diff(self.times) > 0):
            raise ValidationError("times must be strictly increasing")

    @property
    def m(self) -> int:
        return self.times.shape[0]

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def d(self) -> int:
        return 0 if self.aux is None else self.aux.shape[1]

    def rows(self, index) -> "Dataset":
        """New dataset restricted to the given row slice/array."""
        return Dataset(
            times=self.times[index],
            states=self.states[index],
            targets=self.targets[index],
            aux=None if self.aux is None else self.aux[index],
        )


@dataclass(frozen=True)
class Split:
    train: Dataset
    validation: Dataset | None = None
    test: Dataset | None = None


def split_contiguous(dataset: Dataset, fractions) -> Split:
    """Split a dataset into contiguous train/validation/test blocks.

    Block sizes are floor(f*m) with the remainder assigned to train, matching
    how trajectory segments are divided into training and validation sets.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f < 0 for f in fractions):
        raise ValidationError("fractions must be three nonnegative numbers")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValidationError("fractions must sum to 1")
    m = dataset.m
    sizes = [int(np.floor(f * m)) for f in fractions]
    sizes[0] += m - sum(sizes)
    for f, size in zip(fractions, sizes):
        if f > 0 and size == 0:
            raise ValidationError("a requested split block would be empty")
    bounds = np.cumsum([0] + sizes)
    blocks = [
        dataset.rows(slice(bounds[i], bounds[i + 1])) if sizes[i] > 0 else None
        for i in range(3)
    ]
    if blocks[0] is None:
        raise ValidationError("train fraction must be positive")
    return Split(train=blocks[0], validation=blocks[1], test=blocks[2])


def prediction_fit(y_test, y_hat) -> float:
    """Percent fit 100*(1 - ||y_test - y_hat|| / ||y_test||).

    100 means a perfect prediction; the value can be negative for predictions
    worse than the zero predictor.
    """
    y_test = np.asarray(y_test, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if y_test.shape != y_hat.shape or y_test.size < 1:
        raise ShapeError("prediction_fit requires equal-length nonempty vectors")
    denom = float(np.linalg.norm(y_test))
    if denom == 0.0:
        raise UndefinedMetricError("prediction fit undefined: ||y_test|| = 0")
    return 100.0 * (1.0 - float(np.linalg.norm(y_test - y_hat)) / denom)


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset as CSV with canonical column names (t, x*, y, z*)."""
    header = ["t"] + [f"x{i + 1}" for i in range(dataset.n)] + ["y"]
    header += [f"z{i + 1}" for i in range(dataset.d)]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(dataset.m):
            row = [dataset.times[i], *dataset.states[i], dataset.targets[i]]
            if dataset.aux is not None:
                row += list(dataset.aux[i])
            writer.writerow(FLOAT_FORMAT.format(v) for v in row)


def load_csv(path, schema=None) -> Dataset:
    """Load a dataset from CSV.

    ``schema`` maps column roles to header names:
    ``{"time": "t", "states": ["x1", ...], "target": "y", "aux": [...]}``.
    When omitted, the canonical names written by :func:`save_csv` are assumed
    (every ``x*`` column a state, every ``z*`` column aux).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = list(reader)
    header = [h.strip() for h in header]
    if schema is None:
        schema = {
            "time": "t",
            "states": [h for h in header if h.startswith("x")],
            "target": "y",
            "aux": [h for h in header if h.startswith("z")],
        }
    col = {name: i for i, name in enumerate(header)}

    def _index(role, name):
        if name not in col:
            raise SchemaError(f"{path}: no column {name!r} for role {role!r}")
        return col[name]

    it = _index("time", schema["time"])
    istate = [_index("states", c) for c in schema["states"]]
    iy = _index("target", schema["target"])
    iaux = [_index("aux", c) for c in schema.get("aux", []) or []]
    if not istate:
        raise SchemaError(f"{path}: schema names no state columns")

    data = np.empty((len(rows), len(header)))
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {r + 2} has {len(row)} cells")
        for c, cell in enumerate(row):
            try:
                data[r, c] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell {cell!r} at row {r + 2}"
                ) from None
    order = np.argsort(data[:, it], kind="stable")
    data = data[order]
    return Dataset(
        times=data[:, it],
        states=data[:, istate],
        targets=data[:, iy],
        aux=data[:, iaux] if iaux else None,
    )
