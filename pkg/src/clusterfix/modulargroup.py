"""Cluster modular group elements realized as mutation loops.

A loop is a path of edges (a mutation index ``k`` or a transposition
``(i, j)``) starting and ending at the same exchange matrix.  Two loops are
the same group element iff their fingerprints (final C-matrix) agree.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .laurent import LaurentPolynomial, transport_path
from .objective import LogPoint, coords
from .seedcore import (
    ExchangeMatrix,
    TrackedSeed,
    identity,
    is_swap,
    mutate_matrix,
    normalize_edge,
    swap_matrix,
)


class NotALoop(ValueError):
    pass


class BoundExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class MutationLoop:
    base: ExchangeMatrix
    path: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(normalize_edge(e, self.base.n) for e in self.path))

    @property
    def n(self) -> int:
        return self.base.n

    def __len__(self) -> int:
        return len(self.path)

    def to_json(self) -> dict:
        return {
            "base": {"n": self.n, "eps": self.base.as_lists(), "d": list(self.base.d)},
            "path": [{"swap": list(e)} if is_swap(e) else {"mut": e} for e in self.path],
        }


@dataclass(frozen=True)
class GroupFingerprint:
    c: tuple
    perm: tuple = field(default=(), compare=False)

    def is_identity(self) -> bool:
        return self.c == identity(len(self.c))


def _perm_after(path: Iterable, n: int) -> tuple:
    perm = list(range(n))
    for e in path:
        if is_swap(e):
            i, j = e
            perm[i], perm[j] = perm[j], perm[i]
    return tuple(perm)


def validate_loop(loop: MutationLoop) -> GroupFingerprint:
    s = TrackedSeed.initial(loop.base).follow(loop.path)
    if s.eps != loop.base:
        raise NotALoop(f"path {loop.path} ends at {s.eps.eps}, not at {loop.base.eps}")
    return GroupFingerprint(s.c, _perm_after(loop.path, loop.n))


fingerprint = validate_loop


def _same_base(g: MutationLoop, h: MutationLoop) -> None:
    if g.base != h.base:
        raise ValueError("loops have different base exchange matrices")


def compose(g: MutationLoop, h: MutationLoop) -> MutationLoop:
    """Traverse g, then h.  Transpositions are explicit edges, so no relabeling is needed."""
    _same_base(g, h)
    return MutationLoop(g.base, g.path + h.path)


def invert(g: MutationLoop) -> MutationLoop:
    return MutationLoop(g.base, tuple(reversed(g.path)))


def power(g: MutationLoop, k: int) -> MutationLoop:
    if k < 0:
        return power(invert(g), -k)
    return MutationLoop(g.base, g.path * k)


def is_identity(g: MutationLoop) -> bool:
    return validate_loop(g).is_identity()


def same_element(g: MutationLoop, h: MutationLoop) -> bool:
    _same_base(g, h)
    return validate_loop(g) == validate_loop(h)


def order(g: MutationLoop, bound: int = 1000) -> int:
    cur, k = g, 1
    while not validate_loop(cur).is_identity():
        k += 1
        if k > bound:
            raise BoundExceeded(f"order exceeds {bound}")
        cur = compose(cur, g)
    return k


def close_subgroup(generators: Sequence[MutationLoop], bound: int = 1000) -> list[MutationLoop]:
    """All elements of the subgroup generated by ``generators`` (BFS by word length)."""
    if not generators:
        raise ValueError("at least one generator is required")
    base = generators[0].base
    for g in generators:
        _same_base(generators[0], g)
        validate_loop(g)
    e = MutationLoop(base, ())
    seen = {validate_loop(e): e}
    queue = deque([e])
    while queue:
        cur = queue.popleft()
        for g in generators:
            nxt = compose(cur, g)
            fp = validate_loop(nxt)
            if fp not in seen:
                seen[fp] = nxt
                if len(seen) > bound:
                    raise BoundExceeded(f"subgroup has more than {bound} elements")
                queue.append(nxt)
    return list(seen.values())


# --- actions on points and functions -----------------------------------------


def _mutate_a(a: np.ndarray, row: Sequence[int], k: int) -> None:
    pos = sum(v * a[j] for j, v in enumerate(row) if v > 0)
    neg = sum(-v * a[j] for j, v in enumerate(row) if v < 0)
    a[k] = np.logaddexp(pos, neg) - a[k]


def act_point(g: MutationLoop, x) -> LogPoint:
    """Log A-coordinates after traversing the loop (A-chart of the base seed)."""
    a = coords(x).copy()
    em = g.base
    for e in g.path:
        if is_swap(e):
            i, j = e
            a[i], a[j] = a[j], a[i]
            em = swap_matrix(em, i, j)
        else:
            _mutate_a(a, em.eps[e], e)
            em = mutate_matrix(em, e)
    return LogPoint(tuple(a))


def _mutate_x(y: np.ndarray, eps: Sequence[Sequence[int]], k: int) -> None:
    yk = y[k]
    for i in range(len(y)):
        e = eps[i][k]
        if i == k or e == 0:
            continue
        sgn = 1 if e > 0 else -1
        y[i] -= e * np.logaddexp(0.0, -sgn * yk)
    y[k] = -yk


def act_point_X(g: MutationLoop, y) -> LogPoint:
    """Same as :func:`act_point` for log X-coordinates."""
    y = coords(y).copy()
    em = g.base
    for e in g.path:
        if is_swap(e):
            i, j = e
            y[i], y[j] = y[j], y[i]
            em = swap_matrix(em, i, j)
        else:
            _mutate_x(y, em.eps, e)
            em = mutate_matrix(em, e)
    return LogPoint(tuple(y), chart="X")


def pull_back(g: MutationLoop, F: LaurentPolynomial) -> LaurentPolynomial:
    """The Laurent polynomial F o g, so that pull_back(g, F)(x) == F(act_point(g, x)).

    Rewriting F in the chart at the end of the reversed path and reading it
    in the base chart gives exactly the composite with the point action.
    """
    G, em = transport_path(F, reversed(g.path), g.base)
    if em != g.base:
        raise NotALoop("path is not a loop")
    return G
