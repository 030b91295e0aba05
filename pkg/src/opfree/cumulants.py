"""Operator-valued moment functionals, free and Boolean cumulants.

A *word* is ``c_0 X_{i_1} c_1 X_{i_2} ... X_{i_n} c_n`` with symbols
``X_i`` and ``B``-constants ``c_j``; as multilinear arguments this is
``(X_{i_1} c_1, ..., X_{i_n} c_n)`` with ``c_0`` in front.  A joint
distribution oracle is any callable ``oracle(symbols, constants) -> B``.

Every ``pi``-indexed functional is computed by repeatedly collapsing an
interval block ``V`` into the ``B``-element it evaluates to and absorbing
that element into the constant slot where ``V`` sat.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from .algebra import op_norm
from .limits import (
    DiagonalProfile,
    MixedWord,
    boolean_limit_moment,
    limit_oracle,
    semicircular_limit_moment,
)
from .partitions import SetPartition, enumerate_class

__all__ = [
    "Word",
    "Oracle",
    "moment_fn_pi",
    "free_cumulant",
    "boolean_cumulant",
    "CumulantCalculator",
    "FreenessReport",
    "freeness_check",
    "DiagonalProfile",
    "MixedWord",
    "semicircular_limit_moment",
    "boolean_limit_moment",
    "limit_oracle",
]

Oracle = Callable[[tuple, Sequence[np.ndarray]], np.ndarray]


@dataclass(frozen=True)
class Word:
    """Symbols with ``len(symbols) + 1`` interleaved ``B``-constants."""

    symbols: tuple
    constants: tuple

    def __init__(self, symbols: Iterable[Hashable], constants=None, dim: int | None = None):
        syms = tuple(symbols)
        if constants is None:
            if dim is None:
                raise ValueError("dim is required when constants are omitted")
            consts = tuple(np.eye(dim, dtype=complex) for _ in range(len(syms) + 1))
        else:
            consts = tuple(np.asarray(c, dtype=complex) for c in constants)
        if len(consts) != len(syms) + 1:
            raise ValueError(f"{len(syms)} symbols need {len(syms) + 1} constants, got {len(consts)}")
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "constants", consts)

    def __len__(self) -> int:
        return len(self.symbols)

    @property
    def dim(self) -> int:
        return self.constants[0].shape[0]

    def key(self) -> tuple:
        return (self.symbols, tuple(c.tobytes() for c in self.constants))

    def sub(self, start: int, stop: int) -> "Word":
        """Letters ``start..stop-1`` with their internal constants, unit ends."""
        eye = np.eye(self.dim, dtype=complex)
        return Word(self.symbols[start:stop], (eye, *self.constants[start + 1 : stop], eye))

    def absorb(self, start: int, stop: int, value: np.ndarray) -> "Word":
        """Drop letters ``start..stop-1`` and put ``c_start @ value @ c_stop`` in their place."""
        merged = self.constants[start] @ value @ self.constants[stop]
        return Word(
            self.symbols[:start] + self.symbols[stop:],
            (*self.constants[:start], merged, *self.constants[stop + 1 :]),
        )


def _as_labels(pi: SetPartition | None, n: int) -> list[int]:
    if pi is None:
        return [0] * n
    if pi.ground_size != n:
        raise ValueError(f"partition on {pi.ground_size} points for a word of length {n}")
    return list(pi.labels)


def _collapse(labels: list[int], word: Word, block_value: Callable[[Word], np.ndarray]) -> np.ndarray:
    while True:
        if len(set(labels)) <= 1:
            return block_value(word)
        start = None
        for pos, lab in enumerate(labels):
            if pos == 0 or labels[pos - 1] != lab:
                run_start = pos
            end = pos + 1
            if (end == len(labels) or labels[end] != lab) and labels.count(lab) == end - run_start:
                start = run_start
                break
        if start is None:
            raise ValueError("partition has no interval block (crossing partition)")
        value = block_value(word.sub(start, end))
        word = word.absorb(start, end, value)
        labels = labels[:start] + labels[end:]


class CumulantCalculator:
    """Memoized moment/cumulant evaluation against one oracle.

    Full-block free cumulants use the defining subtraction
    ``kappa_n = E[a_1...a_n] - sum_{pi in NC(n), pi != 1_n} kappa^(pi)``;
    Boolean ones the same over ``IN(n)``.
    """

    def __init__(self, oracle: Oracle):
        self.oracle = oracle
        self._moments: dict = {}
        self._free: dict = {}
        self._boolean: dict = {}

    def moment(self, word: Word) -> np.ndarray:
        key = word.key()
        val = self._moments.get(key)
        if val is None:
            val = np.asarray(self.oracle(word.symbols, word.constants), dtype=complex)
            self._moments[key] = val
        return val

    def _full(self, word: Word, cache: dict, cls: str) -> np.ndarray:
        key = word.key()
        val = cache.get(key)
        if val is not None:
            return val
        n = len(word)
        block = (lambda w: self._full(w, cache, cls))
        val = self.moment(word).copy()
        for pi in enumerate_class(n, cls):
            if len(pi) == 1:
                continue
            val -= _collapse(list(pi.labels), word, block)
        cache[key] = val
        return val

    def free_full(self, word: Word) -> np.ndarray:
        return self._full(word, self._free, "noncrossing")

    def boolean_full(self, word: Word) -> np.ndarray:
        return self._full(word, self._boolean, "interval")

    def moment_pi(self, pi: SetPartition | None, word: Word) -> np.ndarray:
        if pi is not None and not pi.is_noncrossing():
            raise ValueError(f"{pi} is crossing")
        return _collapse(_as_labels(pi, len(word)), word, self.moment)

    def free(self, pi: SetPartition | None, word: Word) -> np.ndarray:
        if pi is not None and not pi.is_noncrossing():
            raise ValueError(f"{pi} is crossing")
        return _collapse(_as_labels(pi, len(word)), word, self.free_full)

    def boolean(self, pi: SetPartition | None, word: Word) -> np.ndarray:
        if pi is not None and not pi.is_interval():
            raise ValueError(f"{pi} is not an interval partition")
        return _collapse(_as_labels(pi, len(word)), word, self.boolean_full)


def moment_fn_pi(pi: SetPartition | None, word: Word, oracle: Oracle) -> np.ndarray:
    """``E^(pi)`` on ``word``; ``pi=None`` means the single block."""
    return CumulantCalculator(oracle).moment_pi(pi, word)


def free_cumulant(pi: SetPartition | None, word: Word, oracle: Oracle) -> np.ndarray:
    """``kappa^(pi)`` on ``word``; ``pi=None`` means the single block."""
    return CumulantCalculator(oracle).free(pi, word)


def boolean_cumulant(pi: SetPartition | None, word: Word, oracle: Oracle) -> np.ndarray:
    """``b^(pi)`` on ``word`` for an interval partition ``pi``."""
    return CumulantCalculator(oracle).boolean(pi, word)


@dataclass
class FreenessReport:
    passed: bool
    checked: int = 0
    worst: float = 0.0
    witness: tuple | None = None
    details: list = field(default_factory=list, repr=False)

    def __bool__(self) -> bool:
        return self.passed


def freeness_check(
    oracle: Oracle,
    families: tuple[Iterable[Hashable], Iterable[Hashable]],
    max_len: int,
    tol: float = 1e-10,
    dim: int = 1,
    seed: int = 0,
    stop_early: bool = False,
) -> FreenessReport:
    """Certify freeness of two symbol families by vanishing mixed free cumulants.

    Every word up to ``max_len`` using letters from both families receives
    random complex constants; all ``kappa^(pi)`` with ``pi`` not below the
    family kernel must vanish within ``tol`` relative to the product of the
    constants' norms.
    """
    if max_len > 6:
        raise ValueError("max_len is capped at 6")
    fam_a, fam_b = (tuple(f) for f in families)
    if set(fam_a) & set(fam_b):
        raise ValueError("families must be disjoint")
    side = {s: 0 for s in fam_a} | {s: 1 for s in fam_b}
    report = FreenessReport(passed=True)
    if not fam_a or not fam_b:
        return report
    rng = np.random.default_rng(seed)
    calc = CumulantCalculator(oracle)
    symbols = list(fam_a) + list(fam_b)
    for n in range(2, max_len + 1):
        pis = enumerate_class(n, "noncrossing")
        for syms in itertools.product(symbols, repeat=n):
            fam_labels = [side[s] for s in syms]
            if len(set(fam_labels)) < 2:
                continue
            consts = [
                rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
                for _ in range(n + 1)
            ]
            scale = max(1.0, float(np.prod([op_norm(c) for c in consts])))
            word = Word(syms, consts)
            for pi in pis:
                if all(len({fam_labels[x - 1] for x in b}) == 1 for b in pi.blocks):
                    continue
                val = op_norm(calc.free(pi, word)) / scale
                report.checked += 1
                if val > report.worst:
                    report.worst = val
                    report.witness = (syms, str(pi))
                if val > tol:
                    report.passed = False
                    if stop_early:
                        return report
    return report
