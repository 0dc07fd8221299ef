"""JSON schemas for seeds, loops, fillings and Weyl inputs, plus a deterministic writer."""
from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

import numpy as np

from .laurent import LaurentPolynomial
from .seedcore import ExchangeMatrix, is_swap, validate


class SchemaError(ValueError):
    """Input does not match the expected JSON layout."""


# --- writer ------------------------------------------------------------------


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            raise ValueError(f"cannot serialize non-finite float {v}")
        if v == 0:
            return "0.0"
        s = format(v, ".17g")
        if not any(ch in s for ch in ".e"):
            s += ".0"
        return s
    if isinstance(obj, Fraction):
        return json.dumps(f"{obj.numerator}/{obj.denominator}")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        flat = all(not isinstance(v, (dict, list, tuple, np.ndarray)) or
                   (isinstance(v, (list, tuple)) and all(not isinstance(x, (dict, list, tuple)) for x in v))
                   for v in obj.values())
        if flat:
            inline = "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v, 0, 0)}" for k, v in obj.items()) + "}"
            if len(inline) <= 80:
                return inline
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, str, Fraction, np.number)) or v is None for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "to_json"):
        return _encode(obj.to_json(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON: 17 significant digits for floats, fractions as "p/q"."""
    return _encode(obj, indent, 0) + "\n"


# --- readers -----------------------------------------------------------------


def _int_matrix(m: Any, what: str) -> list[list[int]]:
    if not isinstance(m, list) or not all(isinstance(r, list) for r in m):
        raise SchemaError(f"{what} must be a list of lists")
    for r in m:
        for v in r:
            if not isinstance(v, int) or isinstance(v, bool):
                raise SchemaError(f"{what} entries must be integers")
    return m


def seed_from_json(obj: Any) -> ExchangeMatrix:
    if not isinstance(obj, dict) or "eps" not in obj:
        raise SchemaError('seed must be an object with an "eps" field')
    eps = _int_matrix(obj["eps"], "eps")
    d = obj.get("d")
    if d is not None and (not isinstance(d, list) or not all(isinstance(v, int) for v in d)):
        raise SchemaError("d must be a list of integers")
    if "n" in obj and obj["n"] != len(eps):
        raise SchemaError(f'"n" = {obj["n"]} does not match eps of size {len(eps)}')
    try:
        em = ExchangeMatrix.make(eps, d)
    except ValueError as e:
        raise SchemaError(str(e)) from None
    if not validate(em):
        raise SchemaError("eps is not skew-symmetrizable with the given d")
    return em


def seed_to_json(em: ExchangeMatrix) -> dict:
    return {"n": em.n, "eps": em.as_lists(), "d": list(em.d)}


def edge_from_json(e: Any):
    if isinstance(e, bool):
        raise SchemaError(f"bad edge {e!r}")
    if isinstance(e, int):
        return e
    if isinstance(e, dict):
        if "mut" in e and isinstance(e["mut"], int):
            return e["mut"]
        if "swap" in e:
            e = e["swap"]
        else:
            raise SchemaError(f"bad edge {e!r}")
    if isinstance(e, list) and len(e) == 2 and all(isinstance(v, int) for v in e):
        return tuple(e)
    raise SchemaError(f"bad edge {e!r}")


def path_from_json(p: Any) -> tuple:
    if not isinstance(p, list):
        raise SchemaError("path must be a list")
    return tuple(edge_from_json(e) for e in p)


def path_to_json(path) -> list:
    return [{"swap": list(e)} if is_swap(e) else {"mut": e} for e in path]


def laurent_from_json(obj: Any) -> LaurentPolynomial:
    try:
        return LaurentPolynomial.from_json(obj)
    except (KeyError, TypeError, ValueError) as e:
        raise SchemaError(f"bad Laurent polynomial: {e}") from None


def load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: {e}") from None
