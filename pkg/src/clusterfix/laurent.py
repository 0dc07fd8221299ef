"""Exact sparse Laurent polynomials and cluster-variable expansions.

A :class:`LaurentPolynomial` maps integer exponent vectors to nonzero Python
integers.  Values are immutable; every operation returns a new polynomial.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import _exact
from .seedcore import (
    ExchangeMatrix,
    TrackedSeed,
    is_swap,
    mutate_tracked,
    normalize_edge,
    swap_tracked,
)

MAX_TERMS = 10**6


class NotDivisible(ArithmeticError):
    """Exact division failed; for transports this means F is not universally Laurent."""


class TermLimitExceeded(MemoryError):
    pass


class NoSuchFactorization(ValueError):
    """The polynomial is not of the form A^g F(p*X) with F(0) = 1."""


def _add_exp(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def _grlex_key(e: tuple) -> tuple:
    return (sum(e), e)


class LaurentPolynomial:
    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping[tuple, int] | None = None):
        self.n = n
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != n:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {n}")
            if c:
                clean[e] = int(c)
        if len(clean) > MAX_TERMS:
            raise TermLimitExceeded(f"{len(clean)} terms")
        self.terms = clean
        self._hash = None

    # constructors
    @classmethod
    def zero(cls, n: int) -> "LaurentPolynomial":
        return cls(n)

    @classmethod
    def constant(cls, n: int, c: int = 1) -> "LaurentPolynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def monomial(cls, n: int, exp: Sequence[int], coef: int = 1) -> "LaurentPolynomial":
        return cls(n, {tuple(exp): coef})

    @classmethod
    def variable(cls, n: int, j: int, power: int = 1) -> "LaurentPolynomial":
        e = [0] * n
        e[j] = power
        return cls(n, {tuple(e): 1})

    # ring operations
    def _coerce(self, other) -> "LaurentPolynomial":
        if isinstance(other, LaurentPolynomial):
            if other.n != self.n:
                raise ValueError(f"rank mismatch {self.n} vs {other.n}")
            return other
        if isinstance(other, int):
            return LaurentPolynomial.constant(self.n, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPolynomial(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPolynomial(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(self.terms) * len(other.terms) > 50 * MAX_TERMS:
            raise TermLimitExceeded("product too large")
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = _add_exp(e1, e2)
                out[e] = out.get(e, 0) + c1 * c2
        return LaurentPolynomial(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, p: int):
        if p < 0:
            if not self.is_monomial():
                raise NotDivisible("negative power of a non-monomial")
            (e, c), = self.terms.items()
            if abs(c) != 1:
                raise NotDivisible("negative power of a non-unit monomial")
            return LaurentPolynomial(self.n, {tuple(-v * -p for v in e): c ** (-p)})
        result = LaurentPolynomial.constant(self.n)
        base = self
        while p:
            if p & 1:
                result = result * base
            p >>= 1
            if p:
                base = base * base
        return result

    def __truediv__(self, other):
        return exact_div(self, self._coerce(other))

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPolynomial.constant(self.n, other)
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, key=_grlex_key):
            c = self.terms[e]
            mono = "*".join(
                f"A{j}" if v == 1 else f"A{j}^{v}" for j, v in enumerate(e) if v
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts)

    # queries
    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def is_positive(self) -> bool:
        return bool(self.terms) and all(c > 0 for c in self.terms.values())

    def min_exponents(self) -> tuple:
        return tuple(min(e[j] for e in self.terms) for j in range(self.n))

    def shift(self, exp: Sequence[int]) -> "LaurentPolynomial":
        """Multiply by the monomial A^exp."""
        exp = tuple(exp)
        return LaurentPolynomial(self.n, {_add_exp(e, exp): c for e, c in self.terms.items()})

    def permute(self, perm: Sequence[int]) -> "LaurentPolynomial":
        """Rename variable j to perm[j]."""
        out = {}
        for e, c in self.terms.items():
            new = [0] * self.n
            for j, v in enumerate(e):
                new[perm[j]] = v
            out[tuple(new)] = c
        return LaurentPolynomial(self.n, out)

    def swap(self, i: int, j: int) -> "LaurentPolynomial":
        perm = list(range(self.n))
        perm[i], perm[j] = j, i
        return self.permute(perm)

    def sorted_terms(self) -> list[tuple[tuple, int]]:
        return sorted(self.terms.items())

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"exp": list(e), "coef": str(c)} for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "LaurentPolynomial":
        n = int(obj["n"])
        terms: dict = {}
        for t in obj["terms"]:
            e = tuple(int(v) for v in t["exp"])
            terms[e] = terms.get(e, 0) + int(t["coef"])
        return cls(n, terms)


def variables(n: int) -> list[LaurentPolynomial]:
    return [LaurentPolynomial.variable(n, j) for j in range(n)]


def _monomial_divide(a: LaurentPolynomial, e: tuple, c: int) -> LaurentPolynomial:
    out = {}
    for ea, ca in a.terms.items():
        q, r = divmod(ca, c)
        if r:
            raise NotDivisible(f"coefficient {ca} not divisible by {c}")
        out[tuple(x - y for x, y in zip(ea, e))] = q
    return LaurentPolynomial(a.n, out)


def exact_div(a: LaurentPolynomial, b: LaurentPolynomial) -> LaurentPolynomial:
    """Return q with q*b == a, or raise :class:`NotDivisible`.

    Both operands are shifted into the polynomial range (no monomial factor),
    then divided by grlex long division.
    """
    if a.n != b.n:
        raise ValueError(f"rank mismatch {a.n} vs {b.n}")
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    if not a:
        return LaurentPolynomial.zero(a.n)
    if b.is_monomial():
        (e, c), = b.terms.items()
        return _monomial_divide(a, e, c)
    amin, bmin = a.min_exponents(), b.min_exponents()
    neg = lambda v: tuple(-x for x in v)
    rem = dict(a.shift(neg(amin)).terms)
    bp = b.shift(neg(bmin)).terms
    lb = max(bp, key=_grlex_key)
    lc = bp[lb]
    quot: dict = {}
    while rem:
        lr = max(rem, key=_grlex_key)
        cr = rem[lr]
        qe = tuple(x - y for x, y in zip(lr, lb))
        if min(qe) < 0:
            raise NotDivisible("leading monomial of the divisor does not divide the remainder")
        qc, r = divmod(cr, lc)
        if r:
            raise NotDivisible(f"coefficient {cr} not divisible by {lc}")
        quot[qe] = qc
        for e, c in bp.items():
            t = _add_exp(e, qe)
            v = rem.get(t, 0) - qc * c
            if v:
                rem[t] = v
            else:
                rem.pop(t, None)
        if len(quot) > MAX_TERMS:
            raise TermLimitExceeded("quotient too large")
    shift = tuple(x - y for x, y in zip(amin, bmin))
    return LaurentPolynomial(a.n, quot).shift(shift)


# --- exchange relations -------------------------------------------------------


def exchange_binomial(row: Sequence[int], n: int, skip: int) -> LaurentPolynomial:
    """prod A_j^[row_j]_+ + prod A_j^[-row_j]_+ as a polynomial in n variables."""
    pos = [max(v, 0) if j != skip else 0 for j, v in enumerate(row)]
    neg = [max(-v, 0) if j != skip else 0 for j, v in enumerate(row)]
    pos += [0] * (n - len(pos))
    neg += [0] * (n - len(neg))
    return LaurentPolynomial(n, {tuple(pos): 1}) + LaurentPolynomial(n, {tuple(neg): 1})


def transport(F: LaurentPolynomial, k: int, em: ExchangeMatrix) -> LaurentPolynomial:
    """Rewrite F (a Laurent polynomial in chart i) in the chart mu_k(i).

    Raises :class:`NotDivisible` when the result is not Laurent, i.e. F is not
    universally Laurent.
    """
    n = em.n
    if F.n != n:
        raise ValueError(f"rank mismatch {F.n} vs {n}")
    k = normalize_edge(k, n)
    N = exchange_binomial(em.eps[k], n, k)
    lo = min(e[k] for e in F.terms) if F.terms else 0
    e_top = max(0, -lo)
    powers = {0: LaurentPolynomial.constant(n)}

    def npow(p: int) -> LaurentPolynomial:
        if p not in powers:
            powers[p] = npow(p - 1) * N
        return powers[p]

    G = LaurentPolynomial.zero(n)
    acc: dict = {}
    for e, c in F.terms.items():
        ek = e[k]
        mono = list(e)
        mono[k] = -ek
        for e2, c2 in npow(ek + e_top).terms.items():
            t = _add_exp(tuple(mono), e2)
            acc[t] = acc.get(t, 0) + c * c2
    G = LaurentPolynomial(n, acc)
    if e_top == 0:
        return G
    return exact_div(G, npow(e_top))


def transport_path(F: LaurentPolynomial, path: Iterable, em: ExchangeMatrix) -> tuple[LaurentPolynomial, ExchangeMatrix]:
    """Transport along a sequence of mutation/transposition edges."""
    from .seedcore import mutate_matrix, swap_matrix

    for edge in path:
        edge = normalize_edge(edge, em.n)
        if is_swap(edge):
            F = F.swap(*edge)
            em = swap_matrix(em, *edge)
        else:
            F = transport(F, edge, em)
            em = mutate_matrix(em, edge)
    return F, em


def expand_cluster(path: Iterable, em: ExchangeMatrix, principal: bool = False) -> list[LaurentPolynomial]:
    """The cluster at the end of ``path`` written in the initial chart.

    With ``principal=True`` the ambient ring has 2n variables; the last n are
    the principal coefficients t_j attached through the tracked C-matrix.
    """
    n = em.n
    width = 2 * n if principal else n
    cluster = [LaurentPolynomial.variable(width, j) for j in range(n)]
    seed = TrackedSeed.initial(em)
    for edge in path:
        edge = normalize_edge(edge, n)
        if is_swap(edge):
            i, j = edge
            cluster[i], cluster[j] = cluster[j], cluster[i]
            seed = swap_tracked(seed, i, j)
            continue
        k = edge
        row = seed.eps.eps[k]
        plus = LaurentPolynomial.constant(width)
        minus = LaurentPolynomial.constant(width)
        for j in range(n):
            if row[j] > 0:
                plus = plus * cluster[j] ** row[j]
            elif row[j] < 0:
                minus = minus * cluster[j] ** (-row[j])
        if principal:
            cr = seed.c[k]
            plus = plus.shift([0] * n + [max(v, 0) for v in cr])
            minus = minus.shift([0] * n + [max(-v, 0) for v in cr])
        new = exact_div(plus + minus, cluster[k])
        if not new.is_positive():
            raise ArithmeticError(f"non-positive coefficient in {new!r} along {seed.path + (k,)}")
        cluster[k] = new
        seed = mutate_tracked(seed, k)
    return cluster


def expand_cluster_variable(path: Iterable, j: int, em: ExchangeMatrix, principal: bool = False) -> LaurentPolynomial:
    return expand_cluster(path, em, principal)[j]


def specialize_coefficients(F: LaurentPolynomial) -> LaurentPolynomial:
    """Set the principal coefficients to 1 (2n variables -> n variables)."""
    n = F.n // 2
    out: dict = {}
    for e, c in F.terms.items():
        out[e[:n]] = out.get(e[:n], 0) + c
    return LaurentPolynomial(n, out)


# --- support, slope, separation ----------------------------------------------


def support(F: LaurentPolynomial) -> list[tuple]:
    if not F:
        raise ValueError("the zero polynomial has no support")
    return sorted(F.terms)


def slope_basis(F: LaurentPolynomial) -> list[tuple[Fraction, ...]]:
    """Basis of span{alpha - beta : alpha, beta in Supp(F)}."""
    pts = support(F)
    base = pts[0]
    diffs = [tuple(a - b for a, b in zip(p, base)) for p in pts[1:]]
    return _exact.row_basis(diffs)


@dataclass(frozen=True)
class SeparationData:
    g: tuple
    f_poly: LaurentPolynomial

    def reassemble(self, em: ExchangeMatrix) -> LaurentPolynomial:
        """A^g * F(p*X_1, ..., p*X_n) with p*X_k = prod_j A_j^{eps_kj}."""
        n = em.n
        out: dict = {}
        for m, c in self.f_poly.terms.items():
            e = list(self.g)
            for k, mk in enumerate(m):
                if mk:
                    for j in range(n):
                        e[j] += mk * em.eps[k][j]
            e = tuple(e)
            out[e] = out.get(e, 0) + c
        return LaurentPolynomial(n, out)


def separation(F: LaurentPolynomial, em: ExchangeMatrix) -> SeparationData:
    """Split F into its g-vector and F-polynomial.

    ``F`` is either a plain expansion (n variables; needs an invertible
    exchange matrix) or a principal-coefficient expansion (2n variables),
    which determines the factorization for any exchange matrix.
    """
    n = em.n
    if F.n == 2 * n:
        return _separation_principal(F, em)
    if F.n != n:
        raise ValueError(f"rank mismatch {F.n} vs {n}")
    if _exact.rank(em.eps) < n:
        raise ValueError("exchange matrix is degenerate; pass a principal-coefficient expansion")
    inv = _exact.inverse(em.eps)
    pts = support(F)
    for g in pts:
        if F.terms[g] != 1:
            continue
        fpoly: dict = {}
        for a, c in F.terms.items():
            diff = [x - y for x, y in zip(a, g)]
            m = [sum(Fraction(diff[j]) * inv[j][k] for j in range(n)) for k in range(n)]
            if any(v.denominator != 1 or v < 0 for v in m):
                break
            fpoly[tuple(int(v) for v in m)] = c
        else:
            return SeparationData(tuple(g), LaurentPolynomial(n, fpoly))
    raise NoSuchFactorization(f"{F!r} has no separation with respect to {em.eps}")


def _separation_principal(F: LaurentPolynomial, em: ExchangeMatrix) -> SeparationData:
    n = em.n
    base = [e for e in F.terms if not any(e[n:])]
    if len(base) != 1 or F.terms[base[0]] != 1:
        raise NoSuchFactorization("principal expansion needs a unique coefficient-free term 1*A^g")
    g = base[0][:n]
    fpoly: dict = {}
    for e, c in F.terms.items():
        a, m = e[:n], e[n:]
        if min(m) < 0:
            raise NoSuchFactorization("negative coefficient exponent")
        expect = list(g)
        for k, mk in enumerate(m):
            if mk:
                for j in range(n):
                    expect[j] += mk * em.eps[k][j]
        if tuple(expect) != a:
            raise NoSuchFactorization(f"term {e} is not A^g * y^m")
        fpoly[m] = c
    return SeparationData(tuple(g), LaurentPolynomial(n, fpoly))
