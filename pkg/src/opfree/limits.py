"""Closed-form limit distributions for semicircular and Bernoulli families.

A limit word alternates diagonal letters ``D_t`` (jointly distributed by a
step-function :class:`DiagonalProfile`) with matrix letters ``Y_s``
(semicircular with variance map ``eta_s``, or Boolean Bernoulli).

The evaluator walks the word once per admissible pairing with a stack of
step-valued segments: an opening ``Y`` pushes the current segment, the
matching closing ``Y`` averages the inner segment over the profile, applies
``eta_s`` and glues the result back onto the outer segment.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .algebra import CPMap, as_element
from .partitions import SetPartition, enumerate_class, insert

__all__ = [
    "DiagonalProfile",
    "MixedWord",
    "semicircular_limit_moment",
    "boolean_limit_moment",
    "pairing_moment",
    "limit_oracle",
    "double_sum_moment",
]

LAWS = ("free", "boolean")


@dataclass(frozen=True)
class DiagonalProfile:
    """Step-function joint law of the diagonal symbols.

    ``weights[j]`` is the mass of step ``j``; ``values[t][j]`` is
    ``f_{t,j}``, stored as an array of shape ``(J, k, k)``.  The symbol
    ``None`` always denotes the unit.
    """

    weights: np.ndarray
    values: Mapping[Hashable, np.ndarray]
    dim: int

    def __init__(self, weights: Sequence[float], values: Mapping[Hashable, Sequence] | None = None, dim: int | None = None):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-d sequence")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        vals = {}
        for t, seq in (values or {}).items():
            if t is None:
                raise ValueError("None is reserved for the unit")
            steps = [as_element(v, dim) for v in seq]
            if len(steps) != w.size:
                raise ValueError(f"symbol {t!r} has {len(steps)} values for {w.size} steps")
            dim = steps[0].shape[0] if dim is None else dim
            if any(v.shape[0] != dim for v in steps):
                raise ValueError(f"symbol {t!r}: inconsistent dimensions")
            vals[t] = np.stack(steps)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dim", int(dim or 1))

    @classmethod
    def trivial(cls, dim: int = 1) -> "DiagonalProfile":
        return cls([1.0], {}, dim=dim)

    @property
    def steps(self) -> int:
        return self.weights.size

    @property
    def symbols(self) -> tuple:
        return tuple(self.values)

    def step_values(self, t) -> np.ndarray:
        if t is None:
            return np.broadcast_to(np.eye(self.dim, dtype=complex), (self.steps, self.dim, self.dim))
        try:
            return self.values[t]
        except KeyError:
            raise KeyError(f"diagonal symbol {t!r} is not in the profile") from None

    def is_selfadjoint(self, t, tol: float = 1e-12) -> bool:
        v = self.step_values(t)
        return bool(np.allclose(v, v.conj().transpose(0, 2, 1), atol=tol, rtol=0))

    def mean(self, segment: np.ndarray) -> np.ndarray:
        return np.einsum("j,jab->ab", self.weights, segment)

    def functional(self, symbols: Sequence, constants: Sequence[np.ndarray]) -> np.ndarray:
        """``mu_D(c_0 D_{t_1} c_1 ... D_{t_l} c_l) = sum_j w_j c_0 f_{t_1,j} c_1 ... f_{t_l,j} c_l``."""
        seg = np.broadcast_to(np.asarray(constants[0], dtype=complex), (self.steps, self.dim, self.dim))
        for t, c in zip(symbols, constants[1:]):
            seg = seg @ self.step_values(t) @ c
        return self.mean(seg)


@dataclass(frozen=True)
class MixedWord:
    """``c_0 D_{t_1} c_1 Y_{s_1} c_2 D_{t_2} ... Y_{s_m} c_{2m} D_{t_{m+1}} c_{2m+1}``.

    ``diag`` has ``m + 1`` entries (``None`` for a unit letter).
    ``constants`` may be omitted (all units), given in full (``2m + 2``
    slots), or given as ``m + 2`` elements ``b_0, ..., b_{m+1}`` placed in
    front, after each ``Y`` and at the end.
    """

    diag: tuple
    matrix: tuple
    constants: tuple | None = None

    def __post_init__(self):
        diag, matrix = tuple(self.diag), tuple(self.matrix)
        if len(diag) != len(matrix) + 1:
            raise ValueError(f"need {len(matrix) + 1} diagonal letters, got {len(diag)}")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "matrix", matrix)
        if self.constants is not None:
            consts = tuple(np.asarray(c, dtype=complex) for c in self.constants)
            m = len(matrix)
            if len(consts) == m + 2 and m + 2 != 2 * m + 2:
                dim = consts[0].shape[0]
                full = [np.eye(dim, dtype=complex) for _ in range(2 * m + 2)]
                full[0] = consts[0]
                for j in range(1, m + 1):
                    full[2 * j] = consts[j]
                full[2 * m + 1] = consts[m + 1]
                consts = tuple(full)
            elif len(consts) != 2 * m + 2:
                raise ValueError(f"expected {2 * m + 2} or {m + 2} constants, got {len(consts)}")
            object.__setattr__(self, "constants", consts)

    @classmethod
    def alternating(cls, matrix: Sequence, diag: Sequence | None = None, constants=None) -> "MixedWord":
        """A word with unit diagonal letters unless ``diag`` is given."""
        matrix = tuple(matrix)
        return cls(tuple(diag) if diag is not None else (None,) * (len(matrix) + 1), matrix, constants)

    @property
    def m(self) -> int:
        return len(self.matrix)

    def letters(self) -> list[tuple[str, Hashable]]:
        out = [("D", self.diag[0])]
        for s, t in zip(self.matrix, self.diag[1:]):
            out += [("Y", s), ("D", t)]
        return out

    def full_constants(self, dim: int) -> tuple:
        if self.constants is None:
            return tuple(np.eye(dim, dtype=complex) for _ in range(2 * self.m + 2))
        if self.constants[0].shape[0] != dim:
            raise ValueError(f"constants of dimension {self.constants[0].shape[0]}, expected {dim}")
        return self.constants


def _check_etas(etas: Mapping[Hashable, CPMap], symbols, dim: int) -> None:
    for s in symbols:
        if s not in etas:
            raise KeyError(f"no variance map for matrix symbol {s!r}")
        if etas[s].dim != dim:
            raise ValueError(f"variance map for {s!r} acts on M_{etas[s].dim}, expected M_{dim}")


def pairing_moment(letters, constants, pairing: SetPartition, etas, profile: DiagonalProfile) -> np.ndarray:
    """Evaluate one noncrossing pairing of the ``Y`` letters by nested collapse."""
    k, J = profile.dim, profile.steps
    partner = {}
    for a, b in pairing.blocks:
        partner[a - 1] = b - 1
        partner[b - 1] = None
    seg = np.broadcast_to(np.asarray(constants[0], dtype=complex), (J, k, k))
    stack: list[np.ndarray] = []
    y_count = 0
    for (kind, sym), c in zip(letters, constants[1:]):
        if kind == "D":
            seg = seg @ profile.step_values(sym) @ c
            continue
        idx, y_count = y_count, y_count + 1
        if partner[idx] is not None:
            stack.append(seg)
            seg = np.broadcast_to(c, (J, k, k))
        else:
            inner = etas[sym](profile.mean(seg))
            seg = stack.pop() @ inner @ c
    return profile.mean(seg)


def _admissible(ysyms: Sequence, law: str) -> list[SetPartition]:
    m = len(ysyms)
    if m % 2:
        return []
    if law == "free":
        return [
            p for p in enumerate_class(m, "nc_pair")
            if all(ysyms[a - 1] == ysyms[b - 1] for a, b in p.blocks)
        ]
    if law == "boolean":
        if all(ysyms[2 * r] == ysyms[2 * r + 1] for r in range(m // 2)):
            return enumerate_class(m, "interval_pair")
        return []
    raise ValueError(f"unknown law {law!r}; expected one of {LAWS}")


def _general_moment(letters, constants, etas, profile, law) -> np.ndarray:
    ysyms = [s for kind, s in letters if kind == "Y"]
    _check_etas(etas, set(ysyms), profile.dim)
    for kind, t in letters:
        if kind == "D":
            profile.step_values(t)
    total = np.zeros((profile.dim, profile.dim), dtype=complex)
    if not ysyms:
        return profile.functional([t for _, t in letters], constants)
    for pi in _admissible(ysyms, law):
        total += pairing_moment(letters, constants, pi, etas, profile)
    return total


def semicircular_limit_moment(word: MixedWord, etas: Mapping[Hashable, CPMap], profile: DiagonalProfile | None = None) -> np.ndarray:
    """Limit of ``E_n[D Y D ... Y D]`` for a free semicircular family over ``B``.

    Sums over noncrossing pairings below ``ker s``; odd ``m`` gives 0.
    """
    profile = profile or DiagonalProfile.trivial(next(iter(etas.values())).dim)
    return _general_moment(word.letters(), word.full_constants(profile.dim), etas, profile, "free")


def boolean_limit_moment(word: MixedWord, etas: Mapping[Hashable, CPMap], profile: DiagonalProfile | None = None) -> np.ndarray:
    """Limit mixed moment for a Boolean Bernoulli family.

    Nonzero only when ``s_{2r-1} = s_{2r}`` for every ``r``, in which case
    the single interval pairing is evaluated.
    """
    profile = profile or DiagonalProfile.trivial(next(iter(etas.values())).dim)
    return _general_moment(word.letters(), word.full_constants(profile.dim), etas, profile, "boolean")


def limit_oracle(etas: Mapping[Hashable, CPMap], profile: DiagonalProfile | None = None, law: str = "free"):
    """Joint distribution oracle on arbitrary words over matrix and diagonal symbols."""
    if law not in LAWS:
        raise ValueError(f"unknown law {law!r}; expected one of {LAWS}")
    profile = profile or DiagonalProfile.trivial(next(iter(etas.values())).dim)
    overlap = set(etas) & set(profile.symbols)
    if overlap:
        raise ValueError(f"symbols used as both matrix and diagonal letters: {sorted(map(repr, overlap))}")

    def oracle(symbols, constants):
        letters = [("Y", s) if s in etas else ("D", s) for s in symbols]
        return _general_moment(letters, constants, etas, profile, law)

    return oracle


DOUBLE_SUM_MAX_M = 4


def double_sum_moment(word: MixedWord, etas: Mapping[Hashable, CPMap], profile: DiagonalProfile | None = None) -> np.ndarray:
    """Reference value ``sum_{pi in NC_2(m)} sum_{sigma} kappa^(pi <-> sigma)``.

    ``sigma`` ranges over partitions of the diagonal letters with the
    inserted partition noncrossing; pair blocks contribute ``eta_s`` and
    diagonal blocks the free cumulants of the profile law.  Restricted to
    ``m <= 4``.
    """
    from .cumulants import CumulantCalculator, Word, _collapse

    m = word.m
    if m > DOUBLE_SUM_MAX_M:
        raise ValueError(f"double-sum reference is limited to m <= {DOUBLE_SUM_MAX_M}")
    profile = profile or DiagonalProfile.trivial(next(iter(etas.values())).dim)
    _check_etas(etas, set(word.matrix), profile.dim)
    dcalc = CumulantCalculator(lambda syms, consts: profile.functional([t for _, t in syms], consts))
    full = Word(word.letters(), word.full_constants(profile.dim))

    def block_value(w: Word) -> np.ndarray:
        if w.symbols[0][0] == "Y":
            return etas[w.symbols[0][1]](w.constants[1])
        return dcalc.free_full(w)

    if m == 0:
        return dcalc.free_full(full)
    total = np.zeros((profile.dim, profile.dim), dtype=complex)
    sigmas = enumerate_class(m + 1, "noncrossing")
    for pi in _admissible(list(word.matrix), "free"):
        for sigma in sigmas:
            tau = insert(pi, sigma)
            if tau.is_noncrossing():
                total += _collapse(list(tau.labels), full, block_value)
    return total
