"""Bundled example data and the JSON bundle layout shared with the CLI.

A bundle is a JSON object with any of the keys ``seed``, ``filling``,
``loops`` and ``weyl``::

    {"seed": {"n": 2, "eps": [[0, 1], [-1, 0]]},
     "filling": {"kind": "dt", "depth": 8},
     "loops": [{"path": [{"mut": 0}, {"swap": [0, 1]}]}]}

Filling kinds: ``dt`` (initial, adjacent and terminal clusters), ``puncture``
(initial and adjacent clusters plus a potential given by ``triangles`` or
``potential``) and ``elements`` (an explicit list of Laurent polynomials).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

from .io import SchemaError, laurent_from_json, path_from_json, seed_from_json
from .laurent import LaurentPolynomial
from .modulargroup import MutationLoop
from .nielsen import (
    FillingSet,
    build_dt_filling,
    build_puncture_filling,
    potential_from_triangulation,
    verify_filling,
)
from .seedcore import ExchangeMatrix
from .weyl import WeylInput


@dataclass(frozen=True)
class Bundle:
    name: str = ""
    em: ExchangeMatrix | None = None
    filling_spec: dict | None = None
    loops: tuple = ()
    weyl: WeylInput | None = None
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    def require_seed(self) -> ExchangeMatrix:
        if self.em is None:
            raise SchemaError("no seed given")
        return self.em

    def potential(self) -> LaurentPolynomial | None:
        spec = self.filling_spec or {}
        if "potential" in spec:
            return laurent_from_json(spec["potential"])
        if "triangles" in spec:
            tris = spec["triangles"]
            if not isinstance(tris, list):
                raise SchemaError("triangles must be a list")
            try:
                return potential_from_triangulation([tuple(t) for t in tris], self.require_seed().n)
            except (TypeError, ValueError) as e:
                raise SchemaError(str(e)) from None
        return None

    def elements(self) -> list[LaurentPolynomial]:
        spec = self.filling_spec or {}
        if "elements" not in spec:
            raise SchemaError('filling of kind "elements" needs an "elements" list')
        out = [laurent_from_json(e) for e in spec["elements"]]
        n = self.require_seed().n
        if any(F.n != n for F in out):
            raise SchemaError("filling elements have the wrong rank")
        return out

    def filling(self, strict: bool = True, depth: int | None = None) -> FillingSet:
        em = self.require_seed()
        spec = self.filling_spec
        if spec is None:
            raise SchemaError("no filling given")
        kind = spec.get("kind")
        if kind == "dt":
            return build_dt_filling(em, depth if depth is not None else int(spec.get("depth", 8)))
        if kind == "puncture":
            return build_puncture_filling(em, self.potential(), strict=strict)
        if kind == "elements":
            elements = tuple(self.elements())
            bal, slope = verify_filling(elements, em)
            return FillingSet(elements, em, bal, slope)
        raise SchemaError(f"unknown filling kind {kind!r}")


def _loop(obj: Any, em: ExchangeMatrix) -> MutationLoop:
    if isinstance(obj, list):
        path = path_from_json(obj)
    elif isinstance(obj, dict) and "path" in obj:
        if "base" in obj and seed_from_json(obj["base"]) != em:
            raise SchemaError("loop base differs from the seed")
        path = path_from_json(obj["path"])
    else:
        raise SchemaError("a loop is a path list or an object with a \"path\"")
    return MutationLoop(em, path)


def loops_from_json(obj: Any, em: ExchangeMatrix | None) -> tuple:
    """Accepts {"loops": [...]} (optionally with "base"), a single loop, or a bare list."""
    if isinstance(obj, dict) and "base" in obj and em is None:
        em = seed_from_json(obj["base"])
    if em is None:
        raise SchemaError("loops need a base seed")
    if isinstance(obj, dict) and "loops" in obj:
        items = obj["loops"]
    elif isinstance(obj, dict) and "path" in obj:
        items = [obj]
    elif isinstance(obj, list):
        items = obj
    else:
        raise SchemaError("unrecognized loops layout")
    return tuple(_loop(x, em) for x in items)


def bundle_from_json(obj: Any) -> Bundle:
    if not isinstance(obj, dict):
        raise SchemaError("bundle must be a JSON object")
    em = seed_from_json(obj["seed"]) if "seed" in obj else None
    if em is None and "eps" in obj:
        em = seed_from_json(obj)
    loops = loops_from_json(obj["loops"], em) if "loops" in obj else ()
    weyl = None
    if "weyl" in obj:
        try:
            weyl = WeylInput.from_json(obj["weyl"])
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"bad Weyl input: {e}") from None
    filling = obj.get("filling")
    if filling is not None and not isinstance(filling, dict):
        raise SchemaError("filling must be an object")
    return Bundle(obj.get("name", ""), em, filling, loops, weyl, obj)


def available() -> list[str]:
    root = resources.files(__package__) / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load(name: str) -> Bundle:
    path = resources.files(__package__) / "fixtures" / f"{name}.json"
    if not path.is_file():
        raise KeyError(f"no bundled fixture {name!r}; available: {', '.join(available())}")
    return bundle_from_json(json.loads(path.read_text()))
