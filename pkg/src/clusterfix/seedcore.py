"""Exchange matrices, mutation, C/G-matrix tracking and exchange-graph search.

Conventions
-----------
* ``eps[i][j] * d[j]`` is skew-symmetric (``d`` is the skew-symmetrizer).
* A path is a sequence of edges: an ``int`` k is the mutation at k, a pair
  ``(i, j)`` is the transposition of labels i and j.
* The C-matrix is tracked as the right half of the extended matrix
  ``(eps | C)`` mutated with the same rule as ``eps``; row i is the c-vector
  of the i-th label.  A transposition swaps rows/columns of ``eps`` and rows
  of ``C``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

from . import _exact

Edge = Union[int, tuple]

DEFAULT_MAX_NODES = 200_000
DEFAULT_DEPTH = 12


class BudgetExceeded(RuntimeError):
    """Exploration hit the configured node cap."""


class SignCoherenceError(AssertionError):
    """A tracked C-matrix has a row with mixed signs."""


def _plus(x: int) -> int:
    return x if x > 0 else 0


@dataclass(frozen=True)
class ExchangeMatrix:
    eps: tuple
    d: tuple

    def __post_init__(self):
        eps = tuple(tuple(int(v) for v in row) for row in self.eps)
        d = tuple(int(v) for v in self.d)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "d", d)
        n = len(eps)
        if any(len(row) != n for row in eps):
            raise ValueError("exchange matrix must be square")
        if len(d) != n:
            raise ValueError(f"skew-symmetrizer has length {len(d)}, expected {n}")

    @classmethod
    def make(cls, eps: Sequence[Sequence[int]], d: Sequence[int] | None = None) -> "ExchangeMatrix":
        if d is None:
            d = [1] * len(eps)
        return cls(tuple(map(tuple, eps)), tuple(d))

    @property
    def n(self) -> int:
        return len(self.eps)

    def row(self, k: int) -> tuple:
        return self.eps[k]

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.eps]


def validate(em: ExchangeMatrix) -> bool:
    """True iff ``eps[i][j]*d[j]`` is skew-symmetric, the diagonal vanishes and ``d > 0``."""
    n = em.n
    if any(v <= 0 for v in em.d):
        return False
    e, d = em.eps, em.d
    for i in range(n):
        if e[i][i] != 0:
            return False
        for j in range(i + 1, n):
            if e[i][j] * d[j] != -e[j][i] * d[i]:
                return False
    return True


def _check_index(k: int, n: int) -> None:
    if not isinstance(k, int) or isinstance(k, bool) or not 0 <= k < n:
        raise IndexError(f"mutation index {k!r} out of range for rank {n}")


def _mutate_rows(eps: Sequence[Sequence[int]], ext: Sequence[Sequence[int]], k: int) -> list[list[int]]:
    """Mutate the columns ``ext`` (n rows, any width) attached to ``eps`` at k.

    ``ext`` entries are treated as columns that are never equal to k, i.e.
    only the 'otherwise' branch applies except for row k.
    """
    n = len(eps)
    out = []
    for i in range(n):
        if i == k:
            out.append([-v for v in ext[k]])
            continue
        a, b = _plus(eps[i][k]), _plus(-eps[i][k])
        row = ext[i]
        rk = ext[k]
        out.append([row[j] + a * _plus(rk[j]) - b * _plus(-rk[j]) for j in range(len(row))])
    return out


def mutate_eps(eps: Sequence[Sequence[int]], k: int) -> tuple:
    n = len(eps)
    _check_index(k, n)
    new = []
    for i in range(n):
        row = []
        for j in range(n):
            if i == k or j == k:
                row.append(-eps[i][j])
            else:
                row.append(
                    eps[i][j]
                    + _plus(eps[i][k]) * _plus(eps[k][j])
                    - _plus(-eps[i][k]) * _plus(-eps[k][j])
                )
        new.append(tuple(row))
    return tuple(new)


def mutate_matrix(em: ExchangeMatrix, k: int) -> ExchangeMatrix:
    return ExchangeMatrix(mutate_eps(em.eps, k), em.d)


def swap_eps(eps: Sequence[Sequence[int]], i: int, j: int) -> tuple:
    perm = list(range(len(eps)))
    perm[i], perm[j] = j, i
    return tuple(tuple(eps[perm[a]][perm[b]] for b in range(len(eps))) for a in range(len(eps)))


def swap_matrix(em: ExchangeMatrix, i: int, j: int) -> ExchangeMatrix:
    d = list(em.d)
    d[i], d[j] = d[j], d[i]
    return ExchangeMatrix(swap_eps(em.eps, i, j), tuple(d))


def normalize_edge(edge, n: int) -> Edge:
    """Canonical edge form; raises ``IndexError``/``ValueError`` for malformed edges."""
    if isinstance(edge, (list, tuple)):
        if len(edge) != 2:
            raise ValueError(f"transposition must have two labels: {edge!r}")
        i, j = (int(v) for v in edge)
        _check_index(i, n)
        _check_index(j, n)
        if i == j:
            raise ValueError(f"transposition needs distinct labels: {edge!r}")
        return (min(i, j), max(i, j))
    if isinstance(edge, bool) or not isinstance(edge, int):
        raise ValueError(f"bad edge {edge!r}")
    _check_index(edge, n)
    return edge


def is_swap(edge: Edge) -> bool:
    return isinstance(edge, tuple)


def identity(n: int) -> tuple:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


@dataclass(frozen=True)
class TrackedSeed:
    eps: ExchangeMatrix
    c: tuple
    path: tuple = ()
    d0: tuple = ()  # skew-symmetrizer of the initial seed (columns of C)

    def __post_init__(self):
        if not self.d0:
            object.__setattr__(self, "d0", self.eps.d)

    @classmethod
    def initial(cls, em: ExchangeMatrix) -> "TrackedSeed":
        return cls(em, identity(em.n), (), em.d)

    @property
    def n(self) -> int:
        return self.eps.n

    @property
    def fingerprint(self) -> tuple:
        return (self.eps.eps, self.c)

    def mutate(self, k: int) -> "TrackedSeed":
        return mutate_tracked(self, k)

    def swap(self, i: int, j: int) -> "TrackedSeed":
        return swap_tracked(self, i, j)

    def follow(self, path: Iterable) -> "TrackedSeed":
        return apply_path(self, path)


def mutate_tracked(s: TrackedSeed, k: int) -> TrackedSeed:
    _check_index(k, s.n)
    c = _mutate_rows(s.eps.eps, s.c, k)
    return TrackedSeed(mutate_matrix(s.eps, k), tuple(map(tuple, c)), s.path + (k,), s.d0)


def swap_tracked(s: TrackedSeed, i: int, j: int) -> TrackedSeed:
    e = normalize_edge((i, j), s.n)
    c = list(s.c)
    c[i], c[j] = c[j], c[i]
    return TrackedSeed(swap_matrix(s.eps, i, j), tuple(c), s.path + (e,), s.d0)


def apply_path(s: TrackedSeed, path: Iterable) -> TrackedSeed:
    for edge in path:
        edge = normalize_edge(edge, s.n)
        s = swap_tracked(s, *edge) if is_swap(edge) else mutate_tracked(s, edge)
    return s


def is_sign_coherent(c: Sequence[Sequence[int]]) -> bool:
    for row in c:
        if any(v > 0 for v in row) and any(v < 0 for v in row):
            return False
    return True


def check_sign_coherent(s: TrackedSeed) -> None:
    if not is_sign_coherent(s.c):
        raise SignCoherenceError(f"C-matrix {s.c} reached by path {s.path} is not row sign-coherent")


def g_matrix(s: TrackedSeed) -> tuple:
    """G = D (C^T)^{-1} D^{-1}, computed exactly; must be integral."""
    n = s.n
    try:
        ct_inv = _exact.inverse(_exact.transpose(s.c))
    except ZeroDivisionError as exc:
        raise ValueError(f"C-matrix is not invertible: {s.c}") from exc
    d, d0 = s.eps.d, s.d0
    g = [[Fraction(d[i]) * ct_inv[i][j] / d0[j] for j in range(n)] for i in range(n)]
    for row in g:
        for v in row:
            if v.denominator != 1:
                raise ArithmeticError(f"non-integral G-matrix {g} from C={s.c}")
    return tuple(tuple(int(v) for v in row) for row in g)


@dataclass
class ExchangeGraph:
    """Labelled seeds keyed by the exact (eps, C) fingerprint."""

    root: tuple
    nodes: dict = field(default_factory=dict)
    edges: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.nodes)

    def mutation_edges(self):
        return [e for e in self.edges if not is_swap(e[1])]

    def swap_edges(self):
        return [e for e in self.edges if is_swap(e[1])]


def explore(s0: TrackedSeed, depth: int = DEFAULT_DEPTH, max_nodes: int = DEFAULT_MAX_NODES) -> ExchangeGraph:
    """Breadth-first closure under mutations up to ``depth``."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    check_sign_coherent(s0)
    graph = ExchangeGraph(root=s0.fingerprint)
    graph.nodes[s0.fingerprint] = s0
    frontier = [s0]
    seen_edges = set()
    for _ in range(depth):
        nxt = []
        for s in frontier:
            for k in range(s.n):
                t = mutate_tracked(s, k)
                key = (s.fingerprint, k)
                fp = t.fingerprint
                if fp not in graph.nodes:
                    check_sign_coherent(t)
                    graph.nodes[fp] = t
                    nxt.append(t)
                    if len(graph.nodes) > max_nodes:
                        raise BudgetExceeded(f"more than {max_nodes} seeds within depth {depth}")
                if key not in seen_edges:
                    seen_edges.add(key)
                    seen_edges.add((fp, k))
                    graph.edges.append((s.fingerprint, k, fp))
        frontier = nxt
        if not frontier:
            break
    n = s0.n
    for fp, s in list(graph.nodes.items()):
        for i in range(n):
            for j in range(i + 1, n):
                other = swap_tracked(s, i, j).fingerprint
                if other in graph.nodes and (other, (i, j), fp) not in seen_edges:
                    seen_edges.add((fp, (i, j), other))
                    graph.edges.append((fp, (i, j), other))
    return graph


@dataclass(frozen=True)
class TerminalSearch:
    found: bool
    depth: int
    path: tuple = ()
    seed: TrackedSeed | None = None
    explored: int = 0

    def __bool__(self) -> bool:
        return self.found


def _signed_permutation(c) -> list[int] | None:
    """If c == -P for a permutation matrix P, return the column of each row's -1."""
    cols = []
    for row in c:
        nz = [(j, v) for j, v in enumerate(row) if v != 0]
        if len(nz) != 1 or nz[0][1] != -1:
            return None
        cols.append(nz[0][0])
    return cols if len(set(cols)) == len(cols) else None


def _sort_labels(s: TrackedSeed, cols: list[int]) -> TrackedSeed:
    cols = list(cols)
    for i in range(len(cols)):
        r = cols.index(i)
        if r != i:
            s = swap_tracked(s, i, r)
            cols[i], cols[r] = cols[r], cols[i]
    return s


def find_terminal(s0: TrackedSeed, depth: int = DEFAULT_DEPTH, max_nodes: int = DEFAULT_MAX_NODES) -> TerminalSearch:
    """Shortest mutation path (plus relabelling) to a seed with C = -Id.

    A negative answer only means nothing was found within ``depth`` mutations.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    start = TrackedSeed(s0.eps, s0.c, (), s0.d0)
    seen = {start.fingerprint}
    queue = deque([(start, 0)])
    while queue:
        s, level = queue.popleft()
        cols = _signed_permutation(s.c)
        if cols is not None:
            t = _sort_labels(s, cols)
            return TerminalSearch(True, level, t.path, t, len(seen))
        if level == depth:
            continue
        for k in range(s.n):
            if s.path and s.path[-1] == k:
                continue
            t = mutate_tracked(s, k)
            if t.fingerprint in seen:
                continue
            check_sign_coherent(t)
            seen.add(t.fingerprint)
            if len(seen) > max_nodes:
                raise BudgetExceeded(f"more than {max_nodes} seeds within depth {depth}")
            queue.append((t, level + 1))
    return TerminalSearch(False, depth, explored=len(seen))
