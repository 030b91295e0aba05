"""Entry models, diagonal realizations and single-tuple expectations.

An entry of ``Y(s, n)`` is ``a(i, j) = sum_r Lambda_{s,r} g_{s,r}(i, j) / sqrt(n)``
with ``g_{s,r}`` independent unit-variance scalar fields satisfying
``g(j, i) = conj(g(i, j))``.  Two scalar laws are built in:

* ``circle``: off-diagonal uniform on the unit circle, diagonal uniform on ``{+1, -1}``;
* ``gaussian_hermitian``: off-diagonal ``(x + iy)/sqrt(2)``, diagonal real ``N(0, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from ..algebra import BlockMatrix, CPMap, as_element, is_selfadjoint, op_norm
from ..limits import DiagonalProfile

__all__ = [
    "KINDS",
    "PureMomentOracle",
    "EntryModel",
    "FiniteDiagonal",
    "sample_matrix",
    "realize_diagonal",
    "scalar_factor",
    "entry_expectation",
    "tuple_expectation",
]

KINDS = ("circle", "gaussian_hermitian")


def _double_factorial(k: int) -> int:
    return math.prod(range(k, 0, -2)) if k > 0 else 1


def _gauss_offdiag(p: int, q: int) -> complex:
    return float(math.factorial(p)) if p == q else 0.0


def _gauss_diag(k: int) -> complex:
    return float(_double_factorial(k - 1)) if k % 2 == 0 else 0.0


def _circle_offdiag(p: int, q: int) -> complex:
    return 1.0 if p == q else 0.0


def _circle_diag(k: int) -> complex:
    return 1.0 if k % 2 == 0 else 0.0


@dataclass(frozen=True)
class PureMomentOracle:
    """Moments ``E[g^p conj(g)^q]`` of one scalar entry (off-diagonal) and ``E[g^k]`` (diagonal).

    Laws are assumed invariant under conjugation, so which orientation of
    an off-diagonal pair counts as ``g`` is immaterial.
    """

    off_diagonal: Callable[[int, int], complex]
    diagonal: Callable[[int], complex]
    name: str = "custom"

    @classmethod
    def for_kind(cls, kind: str) -> "PureMomentOracle":
        if kind == "circle":
            return cls(_circle_offdiag, _circle_diag, "circle")
        if kind == "gaussian_hermitian":
            return cls(_gauss_offdiag, _gauss_diag, "gaussian_hermitian")
        raise ValueError(f"unknown entry kind {kind!r}; expected one of {KINDS}")

    def __call__(self, pattern: Sequence[str] | str, diagonal: bool = False) -> complex:
        """Moment of an orientation pattern such as ``"+-+-"``."""
        plus = sum(1 for c in pattern if c == "+")
        minus = len(pattern) - plus
        if diagonal:
            return self.diagonal(plus + minus)
        return self.off_diagonal(plus, minus)


@dataclass(frozen=True)
class EntryModel:
    """Kraus-type entry model for one matrix symbol."""

    symbol: Hashable
    kraus: tuple
    kind: str = "circle"
    oracle: PureMomentOracle = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        ks = tuple(as_element(K) for K in self.kraus)
        if not ks:
            raise ValueError("an entry model needs at least one Kraus element")
        if any(K.shape != ks[0].shape for K in ks):
            raise ValueError("Kraus elements must share one dimension")
        if not all(is_selfadjoint(K) for K in ks):
            raise ValueError(f"Kraus elements of {self.symbol!r} must be selfadjoint")
        if self.kind not in KINDS:
            raise ValueError(f"unknown entry kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kraus", ks)
        if self.oracle is None:
            object.__setattr__(self, "oracle", PureMomentOracle.for_kind(self.kind))

    @classmethod
    def scalar(cls, symbol: Hashable = 1, kind: str = "circle") -> "EntryModel":
        return cls(symbol, (np.eye(1),), kind)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def eta(self) -> CPMap:
        return CPMap(self.kraus)

    def norm_bound(self, m: int) -> float | None:
        """``M_m`` for bounded entries; ``None`` for Gaussian ones."""
        if self.kind != "circle":
            return None
        return float(sum(op_norm(K) for K in self.kraus) ** m)


@dataclass(frozen=True)
class FiniteDiagonal:
    """Finite-``n`` realization of a step profile.

    Step ``j`` owns ``floor(w_j n)`` consecutive indices; the remainder
    goes to the last step.
    """

    profile: DiagonalProfile

    def step_sizes(self, n: int) -> tuple[int, ...]:
        if n < self.profile.steps:
            raise ValueError(f"n={n} is smaller than the number of steps ({self.profile.steps})")
        sizes = [int(math.floor(w * n)) for w in self.profile.weights]
        sizes[-1] += n - sum(sizes)
        return tuple(sizes)

    def step_of_index(self, n: int) -> np.ndarray:
        return np.repeat(np.arange(self.profile.steps), self.step_sizes(n))

    def values(self, t, n: int) -> np.ndarray:
        """``b(i; t, n)`` for ``i = 0..n-1`` as an array ``(n, k, k)``."""
        return np.asarray(self.profile.step_values(t))[self.step_of_index(n)]


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _scalar_field(kind: str, n: int, rng: np.random.Generator) -> np.ndarray:
    iu = np.triu_indices(n, 1)
    G = np.zeros((n, n), dtype=complex)
    if kind == "circle":
        G[iu] = np.exp(2j * np.pi * rng.random(iu[0].size))
        diag = rng.choice([-1.0, 1.0], size=n)
    else:
        G[iu] = (rng.standard_normal(iu[0].size) + 1j * rng.standard_normal(iu[0].size)) / math.sqrt(2)
        diag = rng.standard_normal(n)
    G = G + G.conj().T
    G[np.diag_indices(n)] = diag
    return G


def sample_matrix(model: EntryModel, n: int, rng_seed=None) -> BlockMatrix:
    """One draw of ``Y(s, n) = sum_r G_r ⊗ Lambda_r / sqrt(n)``.

    ``rng_seed`` is anything :func:`numpy.random.default_rng` accepts, or a
    Generator; the fields ``G_r`` are drawn from it in Kraus order.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = _rng(rng_seed)
    k = model.dim
    data = np.zeros((n * k, n * k), dtype=complex)
    for K in model.kraus:
        data += np.kron(_scalar_field(model.kind, n, rng), K)
    return BlockMatrix(data / math.sqrt(n), k)


def realize_diagonal(d: FiniteDiagonal, t, n: int) -> BlockMatrix:
    """``D(t, n) = sum_i b(i; t, n) ⊗ e(i, i; n)``."""
    vals = d.values(t, n)
    k = vals.shape[-1]
    data = np.zeros((n * k, n * k), dtype=complex)
    for i in range(n):
        data[i * k : (i + 1) * k, i * k : (i + 1) * k] = vals[i]
    return BlockMatrix(data, k)


def _group_keys(entries, law: str) -> list:
    """Independence class of each letter, before splitting by Kraus index."""
    if law == "conditional":
        return [(frozenset((x, y)), s) for x, y, s in entries]
    if law == "boolean":
        keys, run = [], -1
        for p, (x, y, s) in enumerate(entries):
            if p == 0 or (frozenset((x, y)), s) != (frozenset(entries[p - 1][:2]), entries[p - 1][2]):
                run += 1
            keys.append(run)
        return keys
    raise ValueError(f"unknown law {law!r}; expected 'conditional' or 'boolean'")


def scalar_factor(entries, kraus_idx, keys, oracles: Mapping[Hashable, PureMomentOracle]) -> complex:
    """``E[prod_p g_{s_p, r_p}(x_p, y_p)]`` given the independence keys."""
    groups: dict = {}
    for (x, y, s), r, key in zip(entries, kraus_idx, keys):
        groups.setdefault((key, s, r, frozenset((x, y))), []).append("+" if x <= y else "-")
    val = 1.0
    for (key, s, r, pair), pattern in groups.items():
        val *= oracles[s](pattern, diagonal=len(pair) == 1)
        if val == 0:
            return 0.0
    return val


def entry_expectation(
    entries: Sequence[tuple],
    constants: Sequence[np.ndarray],
    models: Mapping[Hashable, EntryModel],
    n: int,
    law: str = "conditional",
    oracles: Mapping[Hashable, PureMomentOracle] | None = None,
) -> np.ndarray:
    """``E[c_0 a(x_1, y_1; s_1) c_1 ... a(x_m, y_m; s_m) c_m]`` for explicit entries.

    ``law='conditional'`` treats distinct entries (and symbols) as
    classically independent; ``law='boolean'`` factorizes over maximal runs
    of repeated entries, the Kraus components being independent within a run.
    """
    entries = [tuple(e) for e in entries]
    m = len(entries)
    if len(constants) != m + 1:
        raise ValueError("need one more constant than entries")
    oracles = oracles or {s: models[s].oracle for s in {e[2] for e in entries}}
    keys = _group_keys(entries, law)
    dim = np.asarray(constants[0]).shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    ranges = [range(len(models[s].kraus)) for _, _, s in entries]
    for r in np.ndindex(*[len(x) for x in ranges]):
        sc = scalar_factor(entries, r, keys, oracles)
        if sc == 0:
            continue
        prod = np.asarray(constants[0], dtype=complex)
        for (x, y, s), rp, c in zip(entries, r, constants[1:]):
            prod = prod @ models[s].kraus[rp] @ c
        total += sc * prod
    return total / n ** (m / 2)


def tuple_expectation(
    indices: Sequence[int],
    word,
    models: Mapping[Hashable, EntryModel],
    diag: FiniteDiagonal,
    n: int,
    law: str = "conditional",
    oracles: Mapping[Hashable, PureMomentOracle] | None = None,
) -> np.ndarray:
    """``E[Pro_n(s, t, i)]`` for one index tuple ``i`` of length ``m + 1`` (0-based)."""
    m = word.m
    if len(indices) != m + 1:
        raise ValueError(f"need {m + 1} indices, got {len(indices)}")
    k = diag.profile.dim
    consts = word.full_constants(k)
    steps = diag.step_of_index(n)
    # fold diagonal values into the constants between entries
    merged = []
    cur = consts[0] @ diag.profile.step_values(word.diag[0])[steps[indices[0]]] @ consts[1]
    for p in range(m):
        merged.append(cur)
        cur = consts[2 * p + 2] @ diag.profile.step_values(word.diag[p + 1])[steps[indices[p + 1]]] @ consts[2 * p + 3]
    merged.append(cur)
    entries = [(indices[p], indices[p + 1], word.matrix[p]) for p in range(m)]
    return entry_expectation(entries, merged, models, n, law, oracles)
