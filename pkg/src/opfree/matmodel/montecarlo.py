"""Monte Carlo estimation of mixed moments and convergence sweeps.

Seeding: trial ``t`` of a run with base seed ``seed`` draws the matrix for
the ``j``-th symbol of ``models`` (mapping order) from
``numpy.random.default_rng(numpy.random.SeedSequence([seed, t, j]))``.
Runs are therefore bit-replayable and independent of the word battery.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from ..algebra import op_norm
from ..limits import MixedWord, boolean_limit_moment, semicircular_limit_moment
from .entries import EntryModel, FiniteDiagonal, sample_matrix
from .exact import ExactMoment

__all__ = [
    "trial_rng",
    "empirical_mixed_moment",
    "empirical_moments",
    "SweepRow",
    "convergence_sweep",
    "decay_violations",
]


def trial_rng(seed: int, trial: int, symbol_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial), int(symbol_index)]))


def _diag_factors(word: MixedWord, diag: FiniteDiagonal, n: int) -> list[np.ndarray]:
    """Block-diagonal factors ``c_{2p} D_{t_p} c_{2p+1}`` as ``(n, k, k)`` stacks."""
    k = diag.profile.dim
    consts = word.full_constants(k)
    return [consts[2 * p] @ diag.values(t, n) @ consts[2 * p + 1] for p, t in enumerate(word.diag)]


def _word_trace(V: list[np.ndarray], Ys: list[np.ndarray], n: int, k: int) -> np.ndarray:
    """``E_n[V_0 Y_1 V_1 ... Y_m V_m]`` with block-diagonal ``V`` and flat ``Y``.

    Diagonal factors are applied blockwise and the last product only forms
    its diagonal blocks, so a word of length ``m`` costs ``m - 2`` dense
    matrix products.
    """
    if not Ys:
        return V[0].mean(axis=0)
    cur = np.einsum("iab,ibjc->iajc", V[0], Ys[0].reshape(n, k, n, k))
    for Vp, Y in zip(V[1:-2], Ys[1:-1]):
        cur = np.einsum("iajb,jbc->iajc", cur, Vp).reshape(n * k, n * k) @ Y
        cur = cur.reshape(n, k, n, k)
    if len(Ys) > 1:
        cur = np.einsum("iajb,jbc->iajc", cur, V[-2])
        # only the diagonal blocks of the last product are needed
        diag_blocks = np.einsum("iajb,jbic->iac", cur, Ys[-1].reshape(n, k, n, k))
    else:
        diag_blocks = cur[np.arange(n), :, np.arange(n), :]
    return np.einsum("iab,ibc->ac", diag_blocks, V[-1]) / n


def empirical_moments(
    words: Sequence[MixedWord],
    models: Mapping[Hashable, EntryModel],
    diag: FiniteDiagonal,
    n: int,
    trials: int,
    rng_seed: int = 0,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Monte Carlo ``(mean, stderr)`` of ``E_n`` for several words on shared samples.

    ``stderr`` is entrywise, real and imaginary parts separately:
    ``std(Re)/sqrt(T) + 1j * std(Im)/sqrt(T)``.
    """
    if trials < 2:
        raise ValueError("need at least two trials for a standard error")
    index = {s: j for j, s in enumerate(models)}
    for w in words:
        for s in w.matrix:
            if s not in index:
                raise KeyError(f"no entry model for matrix symbol {s!r}")
    k = diag.profile.dim
    factors = [_diag_factors(w, diag, n) for w in words]
    needed = sorted({s for w in words for s in w.matrix}, key=index.get)
    samples = np.zeros((len(words), trials, k, k), dtype=complex)
    for t in range(trials):
        Y = {s: sample_matrix(models[s], n, trial_rng(rng_seed, t, index[s])).data for s in needed}
        for wi, (w, V) in enumerate(zip(words, factors)):
            samples[wi, t] = _word_trace(V, [Y[s] for s in w.matrix], n, k)
    mean = samples.mean(axis=1)
    se = (samples.real.std(axis=1, ddof=1) + 1j * samples.imag.std(axis=1, ddof=1)) / np.sqrt(trials)
    return [(mean[i], se[i]) for i in range(len(words))]


def empirical_mixed_moment(
    word: MixedWord,
    models: Mapping[Hashable, EntryModel],
    diag: FiniteDiagonal,
    n: int,
    trials: int,
    rng_seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    return empirical_moments([word], models, diag, n, trials, rng_seed)[0]


@dataclass(frozen=True)
class SweepRow:
    word_id: str
    n: int
    mode: str
    deviation_norm: float
    stderr_norm: float
    wall_ms: float

    def as_dict(self) -> dict:
        return asdict(self)


MODES = ("exact", "mc", "both")


def convergence_sweep(
    word: MixedWord,
    models: Mapping[Hashable, EntryModel],
    diag: FiniteDiagonal,
    n_list: Sequence[int],
    mode: str = "exact",
    trials: int = 200,
    seed: int = 0,
    law: str = "conditional",
    word_id: str = "w",
) -> list[SweepRow]:
    """Operator-norm distance of the finite-``n`` moment from its limit.

    ``law='boolean'`` compares the Boolean exact engine with the Bernoulli
    limit; it has no sampling counterpart.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if list(n_list) != sorted(n_list):
        raise ValueError("n_list must be ascending")
    if law == "boolean" and mode != "exact":
        raise ValueError("Boolean models are exact-only")
    etas = {s: models[s].eta for s in set(word.matrix)}
    limit_fn = semicircular_limit_moment if law == "conditional" else boolean_limit_moment
    limit = limit_fn(word, etas, diag.profile)
    rows: list[SweepRow] = []
    engine = ExactMoment(word, models, diag, law) if mode in ("exact", "both") else None
    for n in n_list:
        if engine is not None:
            t0 = time.perf_counter()
            val = engine.at(n)
            rows.append(SweepRow(word_id, n, "exact", op_norm(val - limit), 0.0, 1e3 * (time.perf_counter() - t0)))
        if mode in ("mc", "both"):
            t0 = time.perf_counter()
            mean, se = empirical_mixed_moment(word, models, diag, n, trials, seed)
            rows.append(SweepRow(word_id, n, "mc", op_norm(mean - limit), float(np.linalg.norm(se)), 1e3 * (time.perf_counter() - t0)))
    return rows


def decay_violations(rows: Sequence[SweepRow], ratio: float = 0.75, floor: float = 1e-12) -> list[tuple]:
    """Consecutive exact rows of a word where the deviation fails to shrink by ``ratio``."""
    bad = []
    by_word: dict[str, list[SweepRow]] = {}
    for r in rows:
        if r.mode == "exact":
            by_word.setdefault(r.word_id, []).append(r)
    for wid, rs in by_word.items():
        for a, b in zip(rs, rs[1:]):
            if a.deviation_norm > floor and b.deviation_norm > ratio * a.deviation_norm:
                bad.append((wid, a.n, b.n, a.deviation_norm, b.deviation_norm))
    return bad
