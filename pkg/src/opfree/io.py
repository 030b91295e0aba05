"""JSON codecs for matrices, CP maps and algebra elements.

A complex matrix is a list of rows, each entry ``[re, im]`` (a bare real
number is accepted on input).  A CP map is ``{"dim": k, "kraus": [M, ...]}``
and an element is ``{"dim": k, "entries": M}``; a bare number ``x`` stands
for ``x * I`` wherever an element is expected.
"""
from __future__ import annotations

import numbers

import numpy as np

from .algebra import CPMap

__all__ = [
    "matrix_to_json",
    "matrix_from_json",
    "element_from_json",
    "element_to_json",
    "cpmap_from_json",
    "cpmap_to_json",
]


def _entry(x) -> complex:
    if isinstance(x, numbers.Real):
        return complex(float(x))
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, numbers.Real) for v in x):
        return complex(float(x[0]), float(x[1]))
    raise ValueError(f"matrix entry must be a number or [re, im], got {x!r}")


def matrix_from_json(obj, dim: int | None = None) -> np.ndarray:
    if isinstance(obj, numbers.Real):
        return float(obj) * np.eye(dim or 1, dtype=complex)
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ValueError("a matrix must be a nonempty list of rows")
    if any(len(r) != len(obj) for r in obj):
        raise ValueError("matrix must be square")
    arr = np.array([[_entry(x) for x in row] for row in obj], dtype=complex)
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"expected a {dim}x{dim} matrix, got {arr.shape[0]}x{arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def matrix_to_json(a) -> list:
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def element_from_json(obj, dim: int | None = None) -> np.ndarray:
    if isinstance(obj, dict):
        d = obj.get("dim", dim)
        if dim is not None and d != dim:
            raise ValueError(f"element of dimension {d}, expected {dim}")
        return matrix_from_json(obj["entries"], d)
    return matrix_from_json(obj, dim)


def element_to_json(a) -> dict:
    a = np.asarray(a)
    return {"dim": int(a.shape[0]), "entries": matrix_to_json(a)}


def cpmap_from_json(obj, dim: int | None = None) -> CPMap:
    if not isinstance(obj, dict) or "kraus" not in obj:
        raise ValueError('a CP map must be {"dim": k, "kraus": [...]}')
    d = obj.get("dim", dim)
    if dim is not None and d != dim:
        raise ValueError(f"CP map of dimension {d}, expected {dim}")
    return CPMap([matrix_from_json(K, d) for K in obj["kraus"]])


def cpmap_to_json(eta: CPMap) -> dict:
    return {"dim": eta.dim, "kraus": [matrix_to_json(K) for K in eta.kraus]}
