"""Command-line front end.

Exit status: 0 on success, 1 on domain errors (terminal seed not found,
verification failed, diverging, bound exceeded, ...), 2 on malformed input.
Structured output is JSON; the ``grid`` command writes CSV.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from . import fixtures as fx
from .convexgeom import kernel_basis
from .io import SchemaError, dumps, load_json, path_from_json, path_to_json, seed_to_json
from .laurent import NotDivisible, expand_cluster, separation
from .modulargroup import BoundExceeded, NotALoop, close_subgroup
from .nielsen import (
    Diverging,
    DTNotFound,
    InvarianceFailed,
    MaxIterations,
    MinimizeOptions,
    VerificationFailed,
    find_fixed_point,
    minimize,
    orbit,
)
from .objective import grid_csv
from .seedcore import BudgetExceeded, TrackedSeed, find_terminal, g_matrix, is_sign_coherent
from .weyl import SingularCartan, log_potentials, solve_unit_potentials, validate_weyl

COMMANDS = ("mutate", "expand", "c-matrix", "dt-search", "filling-verify",
            "minimize", "fixed-point", "weyl-solve", "grid")


class DomainError(Exception):
    def __init__(self, kind: str, message: str, **details: Any):
        super().__init__(message)
        self.kind = kind
        self.details = details


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    output: str | None = None
    fixture: str | None = None
    seed_file: str | None = None
    loops_file: str | None = None
    filling_file: str | None = None
    path: str | None = None
    index: int | None = None
    principal: bool = False
    depth: int | None = None
    max_nodes: int = 200000
    tol: float = 1e-8
    bound: int = 1000
    box: list = field(default_factory=list)
    resolution: int = 41
    x0: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise SchemaError(f"unknown command {self.command!r}")
        if self.tol <= 0:
            raise SchemaError("--tol must be positive")
        if self.depth is not None and self.depth < 0:
            raise SchemaError("--depth must be non-negative")
        if self.bound < 1:
            raise SchemaError("--bound must be positive")


# --- input assembly ----------------------------------------------------------


def _bundle(cfg: RunConfig) -> fx.Bundle:
    """Merge --fixture, --input, --seed-file, --filling-file and --loops-file."""
    raw: dict = {}
    if cfg.fixture:
        try:
            raw.update(fx.load(cfg.fixture).raw)
        except KeyError as e:
            raise SchemaError(str(e.args[0])) from None
    for path in (cfg.input, cfg.seed_file, cfg.filling_file):
        if path:
            obj = load_json(path)
            if not isinstance(obj, dict):
                raise SchemaError(f"{path}: expected a JSON object")
            if "eps" in obj:
                raw["seed"] = obj
            elif "kind" in obj:
                raw["filling"] = obj
            else:
                raw.update(obj)
    if cfg.loops_file:
        raw["loops"] = load_json(cfg.loops_file)
    try:
        return fx.bundle_from_json(raw)
    except (KeyError, IndexError, TypeError) as e:
        raise SchemaError(f"malformed input: {e}") from None


def _path(cfg: RunConfig) -> tuple:
    if cfg.path is None:
        return ()
    try:
        obj = json.loads(cfg.path)
    except json.JSONDecodeError as e:
        raise SchemaError(f"--path is not JSON: {e}") from None
    return path_from_json(obj)


def _seed_after(cfg: RunConfig):
    em = _bundle(cfg).require_seed()
    path = _path(cfg)
    try:
        return em, TrackedSeed.initial(em).follow(path), path
    except (IndexError, ValueError) as e:
        raise SchemaError(str(e)) from None


def _fracs(m) -> list:
    return [[str(v) if isinstance(v, Fraction) else v for v in row] for row in m]


# --- commands ----------------------------------------------------------------


def cmd_mutate(cfg: RunConfig) -> dict:
    em, s, path = _seed_after(cfg)
    return {"path": path_to_json(path), "seed": seed_to_json(s.eps), "c_matrix": [list(r) for r in s.c]}


def cmd_c_matrix(cfg: RunConfig) -> dict:
    em, s, path = _seed_after(cfg)
    out = {"path": path_to_json(path), "c_matrix": [list(r) for r in s.c],
           "sign_coherent": is_sign_coherent(s.c)}
    try:
        out["g_matrix"] = [list(r) for r in g_matrix(s)]
    except (ArithmeticError, ValueError) as e:
        raise DomainError("g-matrix", str(e))
    return out


def cmd_expand(cfg: RunConfig) -> dict:
    em, s, path = _seed_after(cfg)
    plain = expand_cluster(path, em)
    princ = expand_cluster(path, em, principal=True)
    idx = range(em.n) if cfg.index is None else [cfg.index]
    out = []
    for j in idx:
        if not 0 <= j < em.n:
            raise SchemaError(f"--index {j} out of range")
        sep = separation(princ[j], em)
        entry = {"index": j, "laurent": (princ if cfg.principal else plain)[j].to_json(),
                 "g_vector": list(sep.g), "f_polynomial": sep.f_poly.to_json()}
        out.append(entry)
    return {"path": path_to_json(path), "variables": out}


def cmd_dt_search(cfg: RunConfig) -> dict:
    em = _bundle(cfg).require_seed()
    depth = 8 if cfg.depth is None else cfg.depth
    try:
        res = find_terminal(TrackedSeed.initial(em), depth, cfg.max_nodes)
    except BudgetExceeded as e:
        raise DomainError("budget-exceeded", str(e), depth=depth, max_nodes=cfg.max_nodes)
    if not res.found:
        raise DomainError("dt-not-found", f"no terminal seed within depth {depth}",
                          depth=depth, explored=res.explored)
    return {"found": True, "depth": res.depth, "path": path_to_json(res.path),
            "mutations": len([e for e in res.path if isinstance(e, int)]), "explored": res.explored}


def cmd_filling_verify(cfg: RunConfig) -> dict:
    b = _bundle(cfg)
    fs = b.filling(strict=False, depth=cfg.depth)
    out = fs.to_json()
    out["kernel"] = [list(v) for v in kernel_basis(fs.em).integer_basis()]
    if not fs.verified:
        raise DomainError("verification-failed", "filling conditions do not hold", report=out)
    return out


def _objective(cfg: RunConfig):
    b = _bundle(cfg)
    fs = b.filling(strict=False, depth=cfg.depth)
    G = close_subgroup(list(b.loops), cfg.bound) if b.loops else []
    return b, fs, orbit(fs, G), G


def _opts(cfg: RunConfig) -> MinimizeOptions:
    x0 = None
    if cfg.x0:
        try:
            x0 = tuple(float(v) for v in json.loads(cfg.x0))
        except (json.JSONDecodeError, TypeError, ValueError):
            raise SchemaError("--x0 must be a JSON list of numbers") from None
    return MinimizeOptions(x0=x0)


def cmd_minimize(cfg: RunConfig) -> dict:
    b, fs, L, G = _objective(cfg)
    res = minimize(L, _opts(cfg), eps=fs.em)
    return {"x_star": list(res.x), "value": res.value, "active": list(res.active),
            "optimality": res.certificate.to_json(), "group_order": max(1, len(G)),
            "iterations": res.iterations,
            "fiber_step2": None if res.fiber is None else list(res.fiber),
            "filling_verified": fs.verified}


def cmd_fixed_point(cfg: RunConfig) -> dict:
    b = _bundle(cfg)
    fs = b.filling(strict=False, depth=cfg.depth)
    res = find_fixed_point(list(b.loops), fs, _opts(cfg), eps=fs.em, bound=cfg.bound, x_tol=cfg.tol)
    out = res.to_json()
    out["filling_verified"] = fs.verified
    return out


def cmd_weyl_solve(cfg: RunConfig) -> dict:
    b = _bundle(cfg)
    if b.weyl is None:
        raise SchemaError('input has no "weyl" object')
    w = b.weyl
    rep = validate_weyl(w)
    if not rep.ok:
        raise DomainError("verification-failed", "Weyl input failed validation", failures=list(rep.failures))
    x0 = np.zeros(w.eps.n) if not cfg.x0 else np.array(json.loads(cfg.x0), dtype=float)
    if len(x0) != w.eps.n:
        raise SchemaError(f"--x0 has length {len(x0)}, expected {w.eps.n}")
    try:
        x = solve_unit_potentials(w, x0)
    except SingularCartan as e:
        raise DomainError("singular-cartan", str(e))
    return {"x": list(x.x), "log_potentials": list(log_potentials(w, x)),
            "log_potentials_x0": list(log_potentials(w, x0))}


def cmd_grid(cfg: RunConfig) -> str:
    b, fs, L, G = _objective(cfg)
    box = cfg.box or [-10.0, 10.0]
    if len(box) != 2 or box[0] >= box[1]:
        raise SchemaError("--box takes LO,HI with LO < HI")
    return grid_csv(L, [tuple(box)] * L.n, cfg.resolution)


HANDLERS: dict[str, Callable[[RunConfig], Any]] = {
    "mutate": cmd_mutate, "expand": cmd_expand, "c-matrix": cmd_c_matrix,
    "dt-search": cmd_dt_search, "filling-verify": cmd_filling_verify, "minimize": cmd_minimize,
    "fixed-point": cmd_fixed_point, "weyl-solve": cmd_weyl_solve, "grid": cmd_grid,
}


def _emit(text: str, cfg: RunConfig) -> None:
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(cfg: RunConfig) -> int:
    try:
        result = HANDLERS[cfg.command](cfg)
    except DomainError as e:
        _emit(dumps({"error": e.kind, "message": str(e), **e.details}), cfg)
        return 1
    except Diverging as e:
        _emit(dumps({"error": "diverging", "message": str(e), "direction": list(e.direction),
                     "witness": None if e.witness is None else list(e.witness)}), cfg)
        return 1
    except DTNotFound as e:
        _emit(dumps({"error": "dt-not-found", "message": str(e), "depth": e.depth}), cfg)
        return 1
    except VerificationFailed as e:
        _emit(dumps({"error": "verification-failed", "message": str(e),
                     "balanced": e.balanced, "slope_span": e.slope}), cfg)
        return 1
    except BoundExceeded as e:
        _emit(dumps({"error": "bound-exceeded", "message": str(e), "bound": cfg.bound}), cfg)
        return 1
    except (MaxIterations, InvarianceFailed, NotDivisible, NotALoop) as e:
        kind = {MaxIterations: "max-iterations", InvarianceFailed: "invariance-failed",
                NotDivisible: "not-divisible", NotALoop: "not-a-loop"}[type(e)]
        _emit(dumps({"error": kind, "message": str(e)}), cfg)
        return 1
    except (SchemaError, IndexError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    _emit(result if isinstance(result, str) else dumps(result), cfg)
    return 0


def _box(text: str) -> list:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected LO,HI") from None
    return [lo, hi]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clusterfix", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--input", help="JSON bundle (seed/filling/loops/weyl)")
    p.add_argument("--output", help="write the result here instead of stdout")
    p.add_argument("--fixture", help=f"bundled input: {', '.join(fx.available())}")
    p.add_argument("--seed-file")
    p.add_argument("--loops-file")
    p.add_argument("--filling-file")
    p.add_argument("--path", help='JSON edge list, e.g. "[0, 1, [0, 1]]"')
    p.add_argument("--index", type=int)
    p.add_argument("--principal", action="store_true", help="expand with principal coefficients")
    p.add_argument("--depth", type=int)
    p.add_argument("--max-nodes", type=int, default=200000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--bound", type=int, default=1000)
    p.add_argument("--box", type=_box, default=None, help="grid range LO,HI for every axis")
    p.add_argument("--resolution", type=int, default=41)
    p.add_argument("--x0", help="JSON list with the initial point")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = RunConfig(**{k: v for k, v in vars(ns).items() if v is not None})
    except SchemaError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
