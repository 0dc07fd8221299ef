"""Filling sets, the max-objective L_G, its minimizer, and fixed points of finite subgroups."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import _exact
from .convexgeom import (
    BalancedReport,
    HullCertificate,
    RationalSubspace,
    SlopeSpanReport,
    is_balanced,
    kernel_basis,
    slope_span_report,
    zero_in_hull,
)
from .laurent import LaurentPolynomial, expand_cluster, slope_basis
from .modulargroup import MutationLoop, act_point, close_subgroup, pull_back
from .objective import (
    LogLaurentFunction,
    LogPoint,
    MaxObjective,
    coords,
    evaluate,
    gradient,
    lg_eval,
)
from .seedcore import ExchangeMatrix, TrackedSeed, find_terminal


class DTNotFound(LookupError):
    def __init__(self, depth: int, explored: int = 0):
        super().__init__(f"no terminal seed within depth {depth} ({explored} seeds explored)")
        self.depth = depth
        self.explored = explored


class VerificationFailed(RuntimeError):
    def __init__(self, message: str, balanced: BalancedReport | None = None,
                 slope: SlopeSpanReport | None = None):
        super().__init__(message)
        self.balanced = balanced
        self.slope = slope


class Diverging(RuntimeError):
    """L_G has no unique minimizer: iterates escape, or a recession direction exists."""

    def __init__(self, message: str, direction: np.ndarray, witness: tuple | None = None,
                 x: np.ndarray | None = None):
        super().__init__(message)
        self.direction = direction
        self.witness = witness
        self.x = x


class MaxIterations(RuntimeError):
    pass


class InvarianceFailed(RuntimeError):
    pass


class NotInKernel(ValueError):
    pass


# --- filling sets ------------------------------------------------------------


@dataclass(frozen=True)
class FillingSet:
    elements: tuple
    em: ExchangeMatrix
    balanced: BalancedReport
    slope: SlopeSpanReport

    @property
    def verified(self) -> bool:
        return self.balanced.balanced and self.slope.spans

    def __len__(self) -> int:
        return len(self.elements)

    def to_json(self) -> dict:
        return {
            "elements": [F.to_json() for F in self.elements],
            "balanced": self.balanced.to_json(),
            "slope_span": self.slope.to_json(),
            "verified": self.verified,
        }


def _dedup(polys: Iterable[LaurentPolynomial]) -> tuple:
    seen, out = set(), []
    for F in polys:
        if F not in seen:
            seen.add(F)
            out.append(F)
    return tuple(out)


def union_support(elements: Iterable[LaurentPolynomial]) -> list[tuple]:
    return sorted({a for F in elements for a in F.terms})


def verify_filling(elements: Sequence[LaurentPolynomial], em: ExchangeMatrix,
                   S: Iterable[Sequence[int]] | None = None) -> tuple[BalancedReport, SlopeSpanReport]:
    """Check the balanced and slope-span conditions in the chart of ``em``.

    A balanced subset forces the whole support union to be balanced, so the
    designated ``S`` is tried first and the union is the fallback.
    """
    for F in elements:
        if not F.is_positive():
            raise ValueError(f"{F!r} has non-positive coefficients")
    K = kernel_basis(em)
    union = union_support(elements)
    bal = None
    if S is not None:
        S = [tuple(a) for a in S]
        missing = set(S) - set(union)
        if missing:
            raise ValueError(f"designated vectors {sorted(missing)} are not support vectors")
        bal = is_balanced(S, prefer=K.basis)
    if bal is None or not bal.balanced:
        bal = is_balanced(union, prefer=K.basis)
    slopes = [slope_basis(F) for F in elements]
    return bal, slope_span_report(slopes, K)


def _unit(n: int, j: int, sign: int = 1) -> tuple:
    return tuple(sign * int(i == j) for i in range(n))


def adjacent_clusters(em: ExchangeMatrix) -> list[LaurentPolynomial]:
    """Initial cluster variables followed by the new variable of each mu_k."""
    n = em.n
    out = list(expand_cluster((), em))
    for k in range(n):
        out.append(expand_cluster((k,), em)[k])
    return out


def build_dt_filling(em: ExchangeMatrix, depth: int = 8, max_nodes: int = 200000) -> FillingSet:
    """Initial, adjacent and terminal clusters, expanded in the initial chart."""
    search = find_terminal(TrackedSeed.initial(em), depth, max_nodes)
    if not search.found:
        raise DTNotFound(depth, search.explored)
    elements = _dedup(adjacent_clusters(em) + expand_cluster(search.path, em))
    n = em.n
    S = [_unit(n, j) for j in range(n)] + [_unit(n, j, -1) for j in range(n)]
    bal, slope = verify_filling(elements, em, S)
    if not (bal and slope):
        raise VerificationFailed("DT filling set failed verification (internal error)", bal, slope)
    return FillingSet(elements, em, bal, slope)


def potential_from_triangulation(triangles: Sequence[Sequence[int]], n: int | None = None) -> LaurentPolynomial:
    """Sum over triangles of A_a/(A_b A_c) + A_b/(A_c A_a) + A_c/(A_a A_b); arcs are 0-based."""
    tris = [tuple(t) for t in triangles]
    if not tris:
        raise ValueError("no triangles given")
    for t in tris:
        if len(t) != 3 or not all(isinstance(v, int) and v >= 0 for v in t):
            raise ValueError(f"malformed triangle {t}")
    if n is None:
        n = 1 + max(max(t) for t in tris)
    terms: dict = {}
    for t in tris:
        if max(t) >= n:
            raise ValueError(f"triangle {t} references an arc outside 0..{n - 1}")
        for r in range(3):
            e = [0] * n
            e[t[r]] += 1
            e[t[(r + 1) % 3]] -= 1
            e[t[(r + 2) % 3]] -= 1
            e = tuple(e)
            terms[e] = terms.get(e, 0) + 1
    return LaurentPolynomial(n, terms)


def build_puncture_filling(em: ExchangeMatrix, W: LaurentPolynomial | None,
                           strict: bool = True) -> FillingSet:
    """Initial and adjacent clusters plus the potential W (omitted if None)."""
    n = em.n
    elements = adjacent_clusters(em)
    S = [_unit(n, j) for j in range(n)]
    if W is not None:
        if W.n != n:
            raise ValueError(f"potential has rank {W.n}, expected {n}")
        if not W.is_positive():
            raise ValueError("potential must have positive coefficients")
        elements.append(W)
        S += list(W.terms)
    elements = _dedup(elements)
    bal, slope = verify_filling(elements, em, S)
    fs = FillingSet(elements, em, bal, slope)
    if strict and not fs.verified:
        what = [name for name, ok in (("balanced", bal.balanced), ("slope-span", slope.spans)) if not ok]
        raise VerificationFailed(f"{' and '.join(what)} condition failed", bal, slope)
    return fs


def orbit_polynomials(elements: Iterable[LaurentPolynomial], G: Sequence[MutationLoop]) -> tuple:
    elements = list(elements)
    return _dedup(pull_back(g, F) for g in G for F in elements)


def orbit(filling: FillingSet | Sequence[LaurentPolynomial], G: Sequence[MutationLoop],
          active_tol: float = 1e-6) -> MaxObjective:
    elements = filling.elements if isinstance(filling, FillingSet) else filling
    if not G:
        polys = _dedup(elements)
    else:
        polys = orbit_polynomials(elements, G)
    parts = tuple(LogLaurentFunction.from_laurent(F, name=f"F{i}") for i, F in enumerate(polys))
    return MaxObjective(parts, active_tol=active_tol)


# --- ensemble map and fibers --------------------------------------------------


def ensemble_project(x, eps: ExchangeMatrix) -> LogPoint:
    """log p*X_k = sum_j eps_kj a_j."""
    return LogPoint(tuple(np.array(eps.eps, dtype=float) @ coords(x)), chart="X")


def fiber_flow(x, beta: Sequence, t: float, eps: ExchangeMatrix | None = None) -> LogPoint:
    if eps is not None:
        b = [_exact.rationalize(v) for v in beta]
        if any(_exact.dot(row, b) != 0 for row in eps.eps):
            raise NotInKernel(f"{tuple(beta)} is not in the kernel of the exchange matrix")
    return LogPoint(tuple(coords(x) + t * np.asarray(beta, dtype=float)))


# --- minimization ------------------------------------------------------------


@dataclass(frozen=True)
class MinimizeOptions:
    mu0: float = 1.0
    mu_min: float = 1e-8
    mu_factor: float = 10.0
    grad_tol: float = 1e-10
    box: float = 1e3
    max_iter: int = 200
    hull_tol: float = 1e-9
    x0: tuple | None = None
    check_coercive: bool = True
    polish: bool = True


@dataclass(frozen=True)
class MinimizeResult:
    x: np.ndarray
    value: float
    active: tuple
    gradients: tuple
    certificate: HullCertificate
    fiber: tuple | None
    iterations: int
    smoothed_grad_norm: float
    polished: bool


def _smoothed(L: MaxObjective, x: np.ndarray, mu: float, order: int = 2):
    vals = L.values(x)
    z = vals / mu
    zmax = z.max()
    w = np.exp(z - zmax)
    s = w.sum()
    w /= s
    S = mu * (zmax + math.log(s))
    if order == 0:
        return S, None, None
    grads = np.array([gradient(p, x) for p in L.parts])
    g = w @ grads
    if order == 1:
        return S, g, None
    H = sum(wk * p.hessian(x) for wk, p in zip(w, L.parts) if wk > 1e-300)
    H = H + ((grads.T * w) @ grads - np.outer(g, g)) / mu
    return S, g, H


def _newton_direction(H: np.ndarray, g: np.ndarray) -> np.ndarray:
    n = len(g)
    lam = 1e-14 * (1.0 + np.abs(H).max())
    for _ in range(40):
        try:
            c = np.linalg.cholesky(H + lam * np.eye(n))
            y = np.linalg.solve(c, -g)
            return np.linalg.solve(c.T, y)
        except np.linalg.LinAlgError:
            lam *= 10
    return -g


def _kkt_polish(L: MaxObjective, x: np.ndarray, active: Sequence[int], lam0: np.ndarray,
                iters: int = 30) -> np.ndarray | None:
    """Solve f_k(x) = t, sum lam_k grad f_k = 0, sum lam_k = 1 on the active set."""
    n, m = L.n, len(active)
    parts = [L.parts[k] for k in active]
    t = max(evaluate(p, x) for p in parts)
    lam = np.array(lam0, dtype=float)
    z = np.concatenate([x, [t], lam])
    for _ in range(iters):
        x, t, lam = z[:n], z[n], z[n + 1:]
        grads = np.array([gradient(p, x) for p in parts])
        r = np.concatenate([
            [evaluate(p, x) - t for p in parts],
            lam @ grads,
            [lam.sum() - 1.0],
        ])
        if np.abs(r).max() < 1e-15:
            break
        J = np.zeros((m + n + 1, n + 1 + m))
        J[:m, :n] = grads
        J[:m, n] = -1.0
        J[m:m + n, :n] = sum(l * p.hessian(x) for l, p in zip(lam, parts))
        J[m:m + n, n + 1:] = grads.T
        J[m + n, n + 1:] = 1.0
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        z = z + step
        if not np.all(np.isfinite(z)):
            return None
    return z[:n]


def _fiber_check(L: MaxObjective, active: Sequence[int], K: RationalSubspace) -> tuple:
    out = []
    for beta in K.integer_basis():
        signs = set()
        for k in active:
            alpha = L.parts[k].terms[0][0]
            v = sum(a * b for a, b in zip(alpha, beta))
            signs.add((v > 0) - (v < 0))
        out.append(1 in signs and -1 in signs)
    return tuple(out)


def _certify(L: MaxObjective, x: np.ndarray, tol: float) -> tuple:
    ev = lg_eval(L, x)
    cert = zero_in_hull([tuple(g) for g in ev.gradients], tol=tol)
    return ev, cert


def check_coercive(L: MaxObjective, prefer: Sequence[Sequence] | None = None) -> BalancedReport:
    """Is the union of part supports balanced (L_G has compact sublevel sets)?"""
    union = sorted({a for p in L.parts for a, _ in p.terms})
    return is_balanced(union, prefer=prefer)


def minimize(L: MaxObjective, opts: MinimizeOptions | None = None,
             eps: ExchangeMatrix | None = None) -> MinimizeResult:
    """Minimize max_k f_k by log-sum-exp smoothing and damped Newton, then certify."""
    opts = opts or MinimizeOptions()
    n = L.n
    K = kernel_basis(eps) if eps is not None else None
    if opts.check_coercive:
        rep = check_coercive(L, prefer=K.basis if K is not None else None)
        if not rep.balanced:
            v = np.array(rep.witness, dtype=float)
            raise Diverging(
                f"objective is not coercive; non-increasing along {list(rep.witness)}",
                v / np.linalg.norm(v), witness=rep.witness)
    x = np.zeros(n) if opts.x0 is None else np.array(opts.x0, dtype=float)
    history = [x.copy()]
    mu = opts.mu0
    total = 0
    gnorm = math.inf
    while True:
        for _ in range(opts.max_iter):
            S, g, H = _smoothed(L, x, mu)
            gnorm = float(np.linalg.norm(g))
            if gnorm < opts.grad_tol:
                break
            d = _newton_direction(H, g)
            slope = float(g @ d)
            if slope >= 0:
                d, slope = -g, -gnorm ** 2
            step, accepted = 1.0, False
            slack = 1e-14 * (1.0 + abs(S))
            while step > 1e-12:
                xn = x + step * d
                Sn = _smoothed(L, xn, mu, order=0)[0]
                if Sn <= S + 1e-4 * step * slope + slack:
                    accepted = True
                    break
                step /= 2
            total += 1
            if not accepted:
                break
            moved = float(np.abs(xn - x).max())
            x = xn
            history.append(x.copy())
            if np.abs(x).max() > opts.box:
                ref = history[max(0, len(history) - 20)]
                v = x - ref
                raise Diverging(f"iterates left the box |x| <= {opts.box:g}",
                                v / np.linalg.norm(v), x=x)
            if moved < 1e-16 * (1.0 + np.abs(x).max()):
                break
        if mu <= opts.mu_min * (1 + 1e-12):
            break
        mu = max(mu / opts.mu_factor, opts.mu_min)

    polished = False
    ev, cert = _certify(L, x, opts.hull_tol)
    if opts.polish:
        vals = L.values(x)
        w = np.exp((vals - vals.max()) / mu)
        w /= w.sum()
        for act in (ev.active, tuple(k for k in ev.active if w[k] > 1e-10)):
            if not act:
                continue
            lam0 = w[list(act)] / w[list(act)].sum()
            xp = _kkt_polish(L, x.copy(), act, lam0)
            if xp is None or np.abs(xp - x).max() > 1e-4:
                continue
            ev_p, cert_p = _certify(L, xp, opts.hull_tol)
            if cert_p.contains and ev_p.value <= ev.value + 1e-13:
                x, ev, cert, polished = xp, ev_p, cert_p, True
                break
    if not cert.contains:
        raise MaxIterations(
            f"no optimality certificate after {total} Newton steps (hull residual {float(cert.residual):.3g})")
    fiber = _fiber_check(L, ev.active, K) if K is not None and K.dim else (() if K is not None else None)
    return MinimizeResult(x, ev.value, ev.active, ev.gradients, cert, fiber, total,
                          gnorm, polished)


# --- fixed points ------------------------------------------------------------


@dataclass(frozen=True)
class FixedPointResult:
    x_star: LogPoint
    value: float
    optimality: HullCertificate
    invariance: tuple
    x_image: LogPoint
    active: tuple = ()
    group_order: int = 1
    fiber: tuple | None = None
    minimize: MinimizeResult | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "x_star": list(self.x_star.x),
            "value": self.value,
            "active": list(self.active),
            "optimality": self.optimality.to_json(),
            "invariance": list(self.invariance),
            "x_image": list(self.x_image.x),
            "group_order": self.group_order,
            "fiber_step2": None if self.fiber is None else list(self.fiber),
        }


def find_fixed_point(generators: Sequence[MutationLoop], filling: FillingSet | Sequence[LaurentPolynomial],
                     opts: MinimizeOptions | None = None, eps: ExchangeMatrix | None = None,
                     bound: int = 1000, x_tol: float = 1e-8) -> FixedPointResult:
    """close_subgroup -> orbit -> minimize -> invariance check -> ensemble image."""
    if isinstance(filling, FillingSet):
        eps = eps or filling.em
    if eps is None:
        if not generators:
            raise ValueError("an exchange matrix is needed when there are no generators")
        eps = generators[0].base
    G = close_subgroup(generators, bound) if generators else [MutationLoop(eps, ())]
    L = orbit(filling, G)
    res = minimize(L, opts, eps=eps)
    xs = LogPoint(tuple(res.x))
    disp = []
    for g in generators:
        moved = np.abs(act_point(g, xs).array() - res.x).max()
        disp.append(float(moved))
    if disp and max(disp) > 10 * x_tol:
        raise InvarianceFailed(f"generator displacement {max(disp):.3g} exceeds {10 * x_tol:g}")
    return FixedPointResult(xs, res.value, res.certificate, tuple(disp),
                            ensemble_project(xs, eps), res.active, len(G), res.fiber, res)
