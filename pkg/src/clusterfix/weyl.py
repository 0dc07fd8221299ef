"""Weyl-group potentials P_s on labeled quivers and the unit-potential locus.

Vertices of the quiver are labeled by pairs (i, s) with i in Z/m and s a
Dynkin node.  P_s = sum_j 1/(A_j^s A_{j+1}^s) * prod_u (A_j^u)^[-e_su]+ (A_{j+1}^u)^[e_su]+
where e is the Coxeter exchange matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _exact
from .objective import LogLaurentFunction, LogPoint, coords, evaluate
from .seedcore import ExchangeMatrix, validate


class SingularCartan(ValueError):
    pass


@dataclass(frozen=True)
class WeylInput:
    S: tuple
    cartan: tuple
    coxeter_eps: tuple
    m: int
    eps: ExchangeMatrix
    labeling: tuple  # labeling[v] = (i, s_index)

    def __post_init__(self):
        object.__setattr__(self, "S", tuple(self.S))
        object.__setattr__(self, "cartan", tuple(tuple(int(v) for v in r) for r in self.cartan))
        object.__setattr__(self, "coxeter_eps", tuple(tuple(int(v) for v in r) for r in self.coxeter_eps))
        object.__setattr__(self, "labeling", tuple((int(i), int(s)) for i, s in self.labeling))
        if not isinstance(self.eps, ExchangeMatrix):
            object.__setattr__(self, "eps", ExchangeMatrix.make(self.eps))

    @property
    def rank(self) -> int:
        return len(self.S)

    def vertex(self, i: int, s: int) -> int:
        return self._index[(i % self.m, s)]

    @property
    def _index(self) -> dict:
        return {lab: v for v, lab in enumerate(self.labeling)}

    def family(self, s: int) -> list[int]:
        return [v for v, (_, t) in enumerate(self.labeling) if t == s]

    def indicator(self, s: int) -> tuple:
        fam = set(self.family(s))
        return tuple(int(v in fam) for v in range(self.eps.n))

    def to_json(self) -> dict:
        return {
            "S": list(self.S),
            "cartan": [list(r) for r in self.cartan],
            "coxeter_eps": [list(r) for r in self.coxeter_eps],
            "m": self.m,
            "eps": self.eps.as_lists(),
            "labeling": [list(l) for l in self.labeling],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "WeylInput":
        return cls(tuple(obj["S"]), obj["cartan"], obj["coxeter_eps"], int(obj["m"]),
                   ExchangeMatrix.make(obj["eps"], obj.get("d")),
                   tuple(tuple(l) for l in obj["labeling"]))


@dataclass(frozen=True)
class WeylReport:
    ok: bool
    failures: tuple

    def __bool__(self) -> bool:
        return self.ok


def validate_weyl(w: WeylInput) -> WeylReport:
    fail = []
    r = w.rank
    C, E = w.cartan, w.coxeter_eps
    if len(C) != r or any(len(row) != r for row in C):
        fail.append(f"cartan matrix is not {r}x{r}")
    if len(E) != r or any(len(row) != r for row in E):
        fail.append(f"coxeter exchange matrix is not {r}x{r}")
    if fail:
        return WeylReport(False, tuple(fail))
    for s in range(r):
        if C[s][s] != 2:
            fail.append(f"C[{w.S[s]},{w.S[s]}] = {C[s][s]} != 2")
        for u in range(r):
            if u == s:
                continue
            if C[s][u] > 0:
                fail.append(f"C[{w.S[s]},{w.S[u]}] = {C[s][u]} > 0")
            if abs(E[s][u]) != -C[u][s]:
                fail.append(f"|e[{w.S[s]},{w.S[u]}]| = {abs(E[s][u])} != -C[{w.S[u]},{w.S[s]}] = {-C[u][s]}")
    if w.m < 2:
        fail.append(f"m = {w.m} < 2")
    expected = {(i, s) for i in range(w.m) for s in range(r)}
    if len(w.labeling) != w.eps.n or set(w.labeling) != expected or len(set(w.labeling)) != len(w.labeling):
        fail.append("labeling is not a bijection onto Z/m x S")
    if not validate(w.eps):
        fail.append("quiver matrix is not skew-symmetrizable with the given d")
    if not fail:
        for s in range(r):
            b = w.indicator(s)
            if any(_exact.dot(row, b) != 0 for row in w.eps.eps):
                fail.append(f"indicator of family {w.S[s]} is not in the kernel")
    return WeylReport(not fail, tuple(fail))


def potential(w: WeylInput, s: int) -> LogLaurentFunction:
    n = w.eps.n
    terms: dict = {}
    for j in range(w.m):
        e = [0] * n
        e[w.vertex(j, s)] -= 1
        e[w.vertex(j + 1, s)] -= 1
        for u in range(w.rank):
            if u == s:
                continue
            c = w.coxeter_eps[s][u]
            if c < 0:
                e[w.vertex(j, u)] += -c
            elif c > 0:
                e[w.vertex(j + 1, u)] += c
        e = tuple(e)
        terms[e] = terms.get(e, 0) + 1
    return LogLaurentFunction(n, tuple(sorted(terms.items())), name=f"P_{w.S[s]}")


def potentials(w: WeylInput) -> dict:
    return {w.S[s]: potential(w, s) for s in range(w.rank)}


def log_potentials(w: WeylInput, x) -> np.ndarray:
    return np.array([evaluate(potential(w, s), x) for s in range(w.rank)])


def weyl_act(w: WeylInput, s: int, x) -> LogPoint:
    """Multiply every A^s_j by P_s; in log coordinates add log P_s to the s-family."""
    a = coords(x).copy()
    a[w.family(s)] += evaluate(potential(w, s), a)
    return LogPoint(tuple(a))


def degree_matrix(w: WeylInput) -> list[list[int]]:
    """D[s][u] = total degree of P_s in the u-family (the same for every term)."""
    D = []
    for s in range(w.rank):
        P = potential(w, s)
        row = []
        for u in range(w.rank):
            fam = w.family(u)
            degs = {sum(a[v] for v in fam) for a, _ in P.terms}
            if len(degs) != 1:
                raise ValueError(f"P_{w.S[s]} is not homogeneous in family {w.S[u]}")
            row.append(degs.pop())
        D.append(row)
    return D


def solve_unit_potentials(w: WeylInput, x0) -> LogPoint:
    """Shift x0 along the family indicators so that every P_s equals 1.

    Flowing by a_u along family u changes log P_s by -C_us a_u, so the shift
    solves C^T a = log P(x0) (one exact linear solve).
    """
    D = degree_matrix(w)
    try:
        Dinv = _exact.inverse(D)
    except ZeroDivisionError:
        raise SingularCartan("Cartan matrix is singular; no unit-potential point need exist") from None
    logP = log_potentials(w, x0)
    a = -np.array([[float(v) for v in row] for row in Dinv]) @ logP
    x = coords(x0).copy()
    for u in range(w.rank):
        x[w.family(u)] += a[u]
    return LogPoint(tuple(x))


def transposed_cartan_check(w: WeylInput) -> bool:
    """The degree matrix equals -C^T, the relation the closed-form solve relies on."""
    D = degree_matrix(w)
    return all(D[s][u] == -w.cartan[u][s] for s in range(w.rank) for u in range(w.rank))
