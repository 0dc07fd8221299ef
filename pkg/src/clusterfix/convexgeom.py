"""Exact rational convex geometry: kernels, balanced sets, slope spans, hull tests.

Everything here runs over ``fractions.Fraction``.  The LP solver is a dense
two-phase tableau simplex with Bland's rule; problems in this package have at
most a few dozen columns, so exactness is cheap.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import _exact
from .seedcore import ExchangeMatrix


# --- exact simplex -----------------------------------------------------------


@dataclass(frozen=True)
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: tuple = ()
    value: Fraction | None = None

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def _pivot(T: list, r: int, c: int) -> None:
    piv = T[r][c]
    if piv != 1:
        T[r] = [v / piv for v in T[r]]
    row = T[r]
    for i, other in enumerate(T):
        if i != r and other[c] != 0:
            f = other[c]
            T[i] = [a - f * b for a, b in zip(other, row)]


def _run(T: list, basis: list, cols: range, max_pivots: int) -> str:
    """Minimize the objective stored in the last row of T (reduced costs, -z in rhs)."""
    obj = T[-1]
    for _ in range(max_pivots):
        obj = T[-1]
        enter = next((j for j in cols if obj[j] < 0), None)
        if enter is None:
            return "optimal"
        best = None
        for i in range(len(T) - 1):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return "unbounded"
        r = best[1]
        _pivot(T, r, enter)
        basis[r] = enter
    raise RuntimeError("simplex pivot limit reached")


def linprog_exact(
    c: Sequence,
    A_eq: Sequence[Sequence],
    b_eq: Sequence,
    free: Iterable[int] = (),
    max_pivots: int = 100000,
) -> LPResult:
    """Minimize c.x subject to A_eq x = b_eq and x >= 0 (except indices in ``free``)."""
    nv = len(c)
    free = sorted(set(free))
    # split each free variable x = x+ - x-; x- columns are appended
    cols = [[Fraction(A_eq[i][j]) for j in range(nv)] for i in range(len(A_eq))]
    cost = [Fraction(v) for v in c]
    for j in free:
        for row in cols:
            row.append(-row[j])
        cost.append(-cost[j])
    ncol = len(cost)
    rows = []
    for row, b in zip(cols, b_eq):
        b = Fraction(b)
        if b < 0:
            row, b = [-v for v in row], -b
        rows.append(row + [b])
    m = len(rows)
    if m == 0:
        if any(v < 0 for v in cost):
            return LPResult("unbounded")
        return LPResult("optimal", tuple(Fraction(0) for _ in range(nv)), Fraction(0))

    # phase 1: artificial columns ncol..ncol+m-1
    T = []
    for i, row in enumerate(rows):
        art = [Fraction(int(i == k)) for k in range(m)]
        T.append(row[:-1] + art + [row[-1]])
    obj = [Fraction(0)] * (ncol + m + 1)
    for row in T:
        for j in range(ncol):
            obj[j] -= row[j]
        obj[-1] -= row[-1]
    T.append(obj)
    basis = list(range(ncol, ncol + m))
    _run(T, basis, range(ncol + m), max_pivots)
    if T[-1][-1] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis; drop redundant rows
    i = 0
    while i < len(T) - 1:
        if basis[i] >= ncol:
            j = next((j for j in range(ncol) if T[i][j] != 0), None)
            if j is None:
                del T[i]
                del basis[i]
                continue
            _pivot(T, i, j)
            basis[i] = j
        i += 1
    T = [row[:ncol] + [row[-1]] for row in T[:-1]]
    obj = cost + [Fraction(0)]
    for i, bj in enumerate(basis):
        if obj[bj] != 0:
            f = obj[bj]
            obj = [a - f * b for a, b in zip(obj, T[i])]
    T.append(obj)
    status = _run(T, basis, range(ncol), max_pivots)
    if status != "optimal":
        return LPResult(status)
    x = [Fraction(0)] * ncol
    for i, bj in enumerate(basis):
        x[bj] = T[i][-1]
    for k, j in enumerate(free):
        x[j] -= x[nv + k]
    x = tuple(x[:nv])
    value = sum((a * b for a, b in zip(c, x)), Fraction(0))
    return LPResult("optimal", x, value)


# --- subspaces ---------------------------------------------------------------


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a rational vector to a primitive integer vector (sign kept)."""
    v = [Fraction(x) for x in v]
    den = math.lcm(*[x.denominator for x in v]) if v else 1
    ints = [int(x * den) for x in v]
    g = math.gcd(*ints) if ints else 0
    return tuple(x // g for x in ints) if g else tuple(ints)


@dataclass(frozen=True)
class RationalSubspace:
    ambient: int
    basis: tuple = ()

    def __post_init__(self):
        basis = tuple(tuple(Fraction(x) for x in v) for v in self.basis)
        for v in basis:
            if len(v) != self.ambient:
                raise ValueError(f"vector of length {len(v)} in ambient {self.ambient}")
        if basis and _exact.rank(basis) != len(basis):
            raise ValueError("basis vectors are linearly dependent")
        object.__setattr__(self, "basis", basis)

    @classmethod
    def span(cls, ambient: int, vectors: Iterable[Sequence]) -> "RationalSubspace":
        vecs = [tuple(v) for v in vectors]
        basis = _exact.row_basis(vecs) if vecs else []
        return cls(ambient, tuple(tuple(Fraction(x) for x in primitive(b)) for b in basis))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, v: Sequence) -> bool:
        if not self.basis:
            return all(x == 0 for x in v)
        return _exact.rank(list(self.basis) + [tuple(v)]) == self.dim

    def orthogonal_complement(self) -> "RationalSubspace":
        if not self.basis:
            return RationalSubspace.span(self.ambient, [
                tuple(int(i == j) for j in range(self.ambient)) for i in range(self.ambient)
            ])
        return RationalSubspace.span(self.ambient, _exact.nullspace(self.basis, self.ambient))

    def integer_basis(self) -> list[tuple[int, ...]]:
        return [primitive(b) for b in self.basis]


def kernel_basis(eps: ExchangeMatrix | Sequence[Sequence[int]]) -> RationalSubspace:
    """Right kernel {v : eps v = 0}, with primitive integer basis vectors."""
    rows = eps.eps if isinstance(eps, ExchangeMatrix) else eps
    n = len(rows)
    vecs = []
    for v in _exact.nullspace(rows, n):
        p = primitive(v)
        if next(x for x in p if x) < 0:
            p = tuple(-x for x in p)
        vecs.append(p)
    return RationalSubspace(n, tuple(vecs))


# --- balanced sets -----------------------------------------------------------


@dataclass(frozen=True)
class BalancedReport:
    balanced: bool
    vectors: tuple
    weights: tuple | None = None
    witness: tuple | None = None
    rank: int = 0
    reason: str = ""

    def __bool__(self) -> bool:
        return self.balanced

    def to_json(self) -> dict:
        return {
            "balanced": self.balanced,
            "vectors": [list(v) for v in self.vectors],
            "weights": None if self.weights is None else [_exact.frac_str(w) for w in self.weights],
            "witness": None if self.witness is None else list(self.witness),
            "rank": self.rank,
            "reason": self.reason,
        }


def _witness(S: list, directions: Sequence[Sequence] | None) -> tuple | None:
    """v = sum z_i d_i with <alpha, v> <= 0 for all alpha and sum <alpha, v> = -1."""
    n = len(S[0])
    if directions is None:
        directions = [tuple(int(i == j) for j in range(n)) for i in range(n)]
    directions = [tuple(Fraction(x) for x in d) for d in directions]
    if not directions:
        return None
    q = len(directions)
    proj = [[_exact.dot(a, d) for d in directions] for a in S]
    # unknowns: z (free, q), u (slack per alpha)
    A, b = [], []
    for k, row in enumerate(proj):
        A.append(list(row) + [int(i == k) for i in range(len(S))])
        b.append(0)
    A.append([sum(r[i] for r in proj) for i in range(q)] + [0] * len(S))
    b.append(-1)
    res = linprog_exact([0] * (q + len(S)), A, b, free=range(q))
    if not res.optimal:
        return None
    z = res.x[:q]
    v = [sum(z[i] * directions[i][j] for i in range(q)) for j in range(n)]
    return primitive(v)


def is_balanced(
    S: Iterable[Sequence[int]],
    prefer: Sequence[Sequence] | None = None,
) -> BalancedReport:
    """Decide whether 0 lies in the interior of Conv(S).

    Equivalently span(S) is the whole space and some strictly positive
    weights annihilate S.  On failure a witness v with <alpha, v> <= 0 on S is
    returned; directions in ``prefer`` (e.g. a kernel basis) are tried first.
    """
    S = sorted({tuple(int(x) for x in a) for a in S})
    if not S:
        raise ValueError("empty vector set")
    n = len(S[0])
    r = _exact.rank(S)
    if r < n:
        null = _exact.nullspace(S, n)
        return BalancedReport(False, tuple(S), witness=primitive(null[0]), rank=r,
                              reason=f"rank {r} < {n}")
    N = len(S)
    # max t with m_a = t + s_a, sum m_a a = 0, sum m_a = 1; columns s (N) then t (free)
    A = []
    for j in range(n):
        A.append([a[j] for a in S] + [sum(a[j] for a in S)])
    A.append([1] * N + [N])
    b = [0] * n + [1]
    res = linprog_exact([0] * N + [-1], A, b, free=[N])
    # infeasible means 0 is not even in Conv(S)
    t = res.x[N] if res.optimal else None
    if t is not None and t > 0:
        weights = tuple(t + s for s in res.x[:N])
        return BalancedReport(True, tuple(S), weights=weights, rank=r)
    w = None
    if prefer:
        w = _witness(S, prefer)
    if w is None:
        w = _witness(S, None)
    return BalancedReport(False, tuple(S), witness=w, rank=r,
                          reason="all vectors lie in a closed half-space")


# --- slope spans -------------------------------------------------------------


@dataclass(frozen=True)
class SlopeSpanReport:
    spans: bool
    rank: int
    target_dim: int
    outside: tuple = ()  # indices of slopes not contained in K-perp

    def __bool__(self) -> bool:
        return self.spans

    def to_json(self) -> dict:
        return {"spans": self.spans, "rank": self.rank, "target_dim": self.target_dim,
                "outside": list(self.outside)}


def slope_span_report(slopes: Sequence, K: RationalSubspace) -> SlopeSpanReport:
    """Does the sum of the slope subspaces equal the orthogonal complement of K?"""
    n = K.ambient
    stacked, outside = [], []
    for idx, s in enumerate(slopes):
        basis = s.basis if isinstance(s, RationalSubspace) else tuple(s)
        for v in basis:
            if len(v) != n:
                raise ValueError("ambient rank mismatch")
            if any(_exact.dot(v, k) != 0 for k in K.basis):
                outside.append(idx)
                break
        stacked.extend(basis)
    r = _exact.rank(stacked) if stacked else 0
    target = n - K.dim
    return SlopeSpanReport(not outside and r == target, r, target, tuple(outside))


def spans_orthocomplement(slopes: Sequence, K: RationalSubspace) -> bool:
    return slope_span_report(slopes, K).spans


# --- convex hull membership ---------------------------------------------------


@dataclass(frozen=True)
class HullCertificate:
    contains: bool
    weights: tuple
    residual: Fraction
    vectors: tuple = field(default=(), repr=False)

    def __bool__(self) -> bool:
        return self.contains

    def to_json(self) -> dict:
        return {
            "contains": self.contains,
            "weights": [_exact.frac_str(w) for w in self.weights],
            "residual": _exact.frac_str(self.residual),
        }


def zero_in_hull(vectors: Sequence[Sequence], tol=Fraction(1, 10**9), digits: int = 12) -> HullCertificate:
    """Decide 0 in Conv(vectors) by minimizing the L1 residual over the simplex.

    Float entries are rounded to ``digits`` decimals first; the decision is
    ``residual <= tol``.  With exact inputs and tol=0 the answer is exact.
    """
    V = [tuple(_exact.rationalize(x, digits) for x in v) for v in vectors]
    if not V:
        raise ValueError("empty vector list")
    n, N = len(V[0]), len(V)
    tol = Fraction(tol) if not isinstance(tol, float) else _exact.rationalize(tol, 15)
    # columns: lambda (N), r+ (n), r- (n)
    A = []
    for j in range(n):
        A.append([v[j] for v in V] + [-int(i == j) for i in range(n)] + [int(i == j) for i in range(n)])
    A.append([1] * N + [0] * (2 * n))
    b = [0] * n + [1]
    res = linprog_exact([0] * N + [1] * (2 * n), A, b)
    return HullCertificate(res.value <= tol, res.x[:N], res.value, tuple(V))
