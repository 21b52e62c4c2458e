"""Monomial basis libraries and the regression matrix they induce.

Monomials are ordered graded-lexicographically: by total degree, then
lexicographically with x1 ranking before x2 before x3 and so on.  For n=2,
r=2 this yields x1, x2, x1^2, x1*x2, x2^2.  Reports key coefficients by
monomial name rather than by position.
"""

import itertools
from dataclasses import dataclass
from math import comb, factorial

import numpy as np

from .errors import ShapeError, ValidationError

_INT64_MAX = 2**63 - 1


@dataclass(frozen=True, order=True)
class Monomial:
    """A single monomial, stored as its exponent vector."""

    exponents: tuple

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    @property
    def name(self) -> str:
        """Human-readable name, e.g. ``x1^2*x3``; the constant is ``1``."""
        parts = []
        for i, e in enumerate(self.exponents):
            if e == 1:
                parts.append(f"x{i + 1}")
            elif e > 1:
                parts.append(f"x{i + 1}^{e}")
        return "*".join(parts) if parts else "1"

    def evaluate(self, states) -> np.ndarray:
        """Evaluate the monomial on each row of an (m, n) state matrix."""
        states = np.atleast_2d(np.asarray(states, dtype=float))
        if states.shape[1] != len(self.exponents):
            raise ShapeError("state dimension does not match the monomial")
        exps = np.asarray(self.exponents, dtype=float)
        return np.prod(states ** exps[None, :], axis=1)


@dataclass(frozen=True)
class MonomialLibrary:
    """All monomials of degree <= r in n variables, in graded-lex order."""

    n: int
    max_order: int
    include_constant: bool
    monomials: tuple

    def __post_init__(self):
        seen = set()
        prev_degree = 0
        for mono in self.monomials:
            if len(mono.exponents) != self.n:
                raise ValidationError("monomial arity does not match n")
            deg = mono.degree
            if deg == 0 and not self.include_constant:
                raise ValidationError("constant term present but not enabled")
            if deg > self.max_order:
                raise ValidationError("monomial degree exceeds max order")
            if deg < prev_degree:
                raise ValidationError("library ordering is not graded")
            if mono.exponents in seen:
                raise ValidationError("duplicate monomial in library")
            seen.add(mono.exponents)
            prev_degree = deg

    @property
    def size(self) -> int:
        return len(self.monomials)

    @property
    def names(self) -> list:
        return [m.name for m in self.monomials]

    def index_of(self, name: str) -> int:
        return self.names.index(name)


def _exponent_vectors(n, degree):
    """All exponent vectors of the given total degree, lexicographic with
    x1 the highest-ranked variable (descending tuple order)."""
    vectors = []
    for combo in itertools.combinations_with_replacement(range(n), degree):
        exps = [0] * n
        for var in combo:
            exps[var] += 1
        vectors.append(tuple(exps))
    return sorted(vectors, reverse=True)


def enumerate_monomials(n: int, r: int, include_constant: bool = False) -> MonomialLibrary:
    """Library of all monomials of degree 1..r (0..r with the constant)."""
    if n < 1 or r < 1:
        raise ValidationError("n and r must be positive")
    monomials = []
    if include_constant:
        monomials.append(Monomial((0,) * n))
    for degree in range(1, r + 1):
        monomials.extend(Monomial(e) for e in _exponent_vectors(n, degree))
    return MonomialLibrary(
        n=n, max_order=r, include_constant=include_constant, monomials=tuple(monomials)
    )


def build_theta(library: MonomialLibrary, states) -> np.ndarray:
    """Regression matrix: Theta[i, j] = monomial j evaluated on state row i."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    if states.shape[1] != library.n:
        raise ShapeError(
            f"states have {states.shape[1]} columns, library expects {library.n}"
        )
    theta = np.empty((states.shape[0], library.size))
    for j, mono in enumerate(library.monomials):
        theta[:, j] = mono.evaluate(states)
    return theta


def monomial_weight(exponents) -> int:
    """Multinomial multiplicity of a monomial inside (z^T z')^j.

    For exponents (k1, ..., kn) summing to j this is j!/(k1! ... kn!).
    """
    exponents = tuple(int(e) for e in exponents)
    if any(e < 0 for e in exponents):
        raise ValidationError("exponents must be nonnegative")
    j = sum(exponents)
    if j < 1:
        raise ValidationError("total degree must be at least 1")
    w = factorial(j)
    for e in exponents:
        w //= factorial(e)
    if w > _INT64_MAX:
        raise OverflowError("multinomial weight exceeds the 64-bit range")
    return w


def count_embedded_monomials(n: int, j: int) -> int:
    """Number of order-j monomials counted with multiplicity: n^j."""
    if n < 1 or j < 1:
        raise ValidationError("n and j must be positive")
    count = n**j
    if count > _INT64_MAX:
        raise OverflowError("n^j exceeds the 64-bit range")
    return count


def count_distinct_monomials(n: int, j: int) -> int:
    """Number of distinct order-j monomials in n variables: C(n+j-1, j)."""
    if n < 1 or j < 1:
        raise ValidationError("n and j must be positive")
    count = comb(n + j - 1, j)
    if count > _INT64_MAX:
        raise OverflowError("count exceeds the 64-bit range")
    return count
