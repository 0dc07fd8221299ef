"""Log-Laurent functions f(x) = log sum_a c_a exp(<a, x>) and their max-aggregates."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _exact
from .laurent import LaurentPolynomial, slope_basis


@dataclass(frozen=True)
class LogPoint:
    x: tuple
    chart: str = "base"

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        if not all(math.isfinite(v) for v in x):
            raise ValueError(f"non-finite coordinates {x}")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return len(self.x)

    def array(self) -> np.ndarray:
        return np.array(self.x)


def coords(x) -> np.ndarray:
    if isinstance(x, LogPoint):
        return x.array()
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class LogLaurentFunction:
    n: int
    terms: tuple
    name: str = ""
    _alpha: np.ndarray = field(init=False, repr=False)
    _logc: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        terms = tuple((tuple(int(v) for v in a), int(c)) for a, c in self.terms)
        if not terms:
            raise ValueError("a log-Laurent function needs at least one term")
        for a, c in terms:
            if c <= 0:
                raise ValueError(f"coefficient {c} is not positive")
            if len(a) != self.n:
                raise ValueError(f"exponent {a} has wrong length")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "_alpha", np.array([a for a, _ in terms], dtype=float).reshape(len(terms), self.n))
        object.__setattr__(self, "_logc", np.array([math.log(c) for _, c in terms]))

    @classmethod
    def from_laurent(cls, F: LaurentPolynomial, name: str = "") -> "LogLaurentFunction":
        if not F.is_positive():
            raise ValueError(f"{F!r} does not have positive coefficients")
        return cls(F.n, tuple(F.sorted_terms()), name)

    def to_laurent(self) -> LaurentPolynomial:
        return LaurentPolynomial(self.n, dict(self.terms))

    @property
    def support(self) -> list[tuple]:
        return [a for a, _ in self.terms]

    def _exponents(self, x) -> np.ndarray:
        return self._logc + self._alpha @ coords(x)

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def weights(self, x) -> np.ndarray:
        e = self._exponents(x)
        w = np.exp(e - e.max())
        return w / w.sum()

    def hessian(self, x) -> np.ndarray:
        w = self.weights(x)
        g = w @ self._alpha
        return (self._alpha.T * w) @ self._alpha - np.outer(g, g)


def evaluate(f: LogLaurentFunction, x) -> float:
    e = f._exponents(x)
    M = e.max()
    return float(M + math.log(np.exp(e - M).sum()))


def gradient(f: LogLaurentFunction, x) -> np.ndarray:
    return f.weights(x) @ f._alpha


@dataclass(frozen=True)
class MaxObjective:
    parts: tuple
    active_tol: float = 1e-6
    active_floor: float = 1e-9

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValueError("a max-objective needs at least one part")
        if len({p.n for p in parts}) != 1:
            raise ValueError("parts have different ranks")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return self.parts[0].n

    def values(self, x) -> np.ndarray:
        return np.array([evaluate(p, x) for p in self.parts])

    def __call__(self, x) -> float:
        return float(self.values(x).max())


@dataclass(frozen=True)
class LGEval:
    value: float
    active: tuple
    gradients: tuple


def active_set(values: np.ndarray, rel: float = 1e-6, floor: float = 1e-9) -> tuple:
    M = values.max()
    cut = M - max(rel * abs(M), floor)
    return tuple(int(i) for i in np.flatnonzero(values >= cut))


def lg_eval(L: MaxObjective, x) -> LGEval:
    vals = L.values(x)
    act = active_set(vals, L.active_tol, L.active_floor)
    grads = tuple(gradient(L.parts[i], x) for i in act)
    return LGEval(float(vals.max()), act, grads)


def midpoint_convexity_check(f: LogLaurentFunction, x, y, slack: float = 1e-12) -> bool:
    x, y = coords(x), coords(y)
    return evaluate(f, (x + y) / 2) <= (evaluate(f, x) + evaluate(f, y)) / 2 + slack


def strict_direction_check(f: LogLaurentFunction, v: Sequence) -> bool:
    """True iff f is strictly convex along v, i.e. v is not orthogonal to Slope(f)."""
    v = [_exact.rationalize(t) for t in v]
    if not any(v):
        raise ValueError("direction must be nonzero")
    basis = slope_basis(f.to_laurent())
    return any(_exact.dot(b, v) != 0 for b in basis)


def second_difference(f: LogLaurentFunction, x, v, h: float = 0.25) -> float:
    x, v = coords(x), coords(v)
    return evaluate(f, x + h * v) - 2 * evaluate(f, x) + evaluate(f, x - h * v)


def grid_rows(L: MaxObjective, box: Sequence[tuple[float, float]], resolution: int):
    """Yield (a_1, ..., a_n, L_G) on a regular grid over ``box``."""
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if len(box) != L.n:
        raise ValueError(f"box has {len(box)} ranges for rank {L.n}")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    for pt in itertools.product(*axes):
        yield tuple(float(v) for v in pt) + (L(np.array(pt)),)


def grid_csv(L: MaxObjective, box: Sequence[tuple[float, float]], resolution: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"a{j + 1}" for j in range(L.n)] + ["L_G"])
    for row in grid_rows(L, box, resolution):
        w.writerow([format(v, ".17g") for v in row])
    return buf.getvalue()
