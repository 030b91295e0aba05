"""Exact finite-``n`` mixed moments by summing over kernel partitions.

``E_n[D Y D ... Y D] = n^{-1} sum_i E[Pro_n(s, t, i)]`` with ``i_1 = i_{m+1}``.
Tuples are grouped by ``sigma = ker i``; only ``sigma`` with property P can
contribute.  For each ``sigma`` the tuple is canonicalized (block ``b`` gets
index label ``b``), the Kraus components are expanded, and the diagonal
values are summed over all assignments of ``sigma``-blocks to profile steps.
The number of tuples realizing an assignment with ``c_j`` blocks on step
``j`` is ``prod_j (size_j)_(c_j)`` (falling factorials), so the ``n``-free
part is computed once and any ``n`` is a cheap weighted sum.
"""
from __future__ import annotations

import itertools
from typing import Hashable, Mapping

import numpy as np

from ..limits import MixedWord
from ..partitions import SetPartition, enumerate_class, falling_factorial, has_property_p
from .entries import EntryModel, FiniteDiagonal, PureMomentOracle, _group_keys, scalar_factor

__all__ = ["EXACT_MAX_M", "ExactMoment", "exact_moment"]

EXACT_MAX_M = 8


class ExactMoment:
    """Exact ``E_n`` of one word as a function of ``n``."""

    def __init__(
        self,
        word: MixedWord,
        models: Mapping[Hashable, EntryModel],
        diag: FiniteDiagonal,
        law: str = "conditional",
        oracles: Mapping[Hashable, PureMomentOracle] | None = None,
    ):
        if word.m > EXACT_MAX_M:
            raise ValueError(f"exact engine is limited to m <= {EXACT_MAX_M}, got m={word.m}")
        for s in word.matrix:
            if s not in models:
                raise KeyError(f"no entry model for matrix symbol {s!r}")
            if models[s].dim != diag.profile.dim:
                raise ValueError(f"model {s!r} has dimension {models[s].dim}, profile {diag.profile.dim}")
        for t in word.diag:
            diag.profile.step_values(t)
        _group_keys([], law)
        self.word = word
        self.models = models
        self.diag = diag
        self.law = law
        self.oracles = oracles or {s: models[s].oracle for s in set(word.matrix)}
        self._terms: dict[tuple, np.ndarray] | None = None

    def kernels(self) -> list[SetPartition]:
        m = self.word.m
        if m == 0:
            return [SetPartition([[1]], 1)]
        return [s for s in enumerate_class(m + 1, "closed") if has_property_p(s)]

    def sigma_terms(self, sigma: SetPartition) -> dict[tuple, np.ndarray]:
        """``n``-free contributions of one kernel, keyed by blocks-per-step counts."""
        word, prof = self.word, self.diag.profile
        m, k, J = word.m, prof.dim, prof.steps
        if sigma.ground_size != m + 1:
            raise ValueError("kernel has the wrong ground size")
        if m and sigma.labels[0] != sigma.labels[m]:
            return {}
        labels = sigma.labels
        entries = [(labels[p], labels[p + 1], word.matrix[p]) for p in range(m)]
        keys = _group_keys(entries, self.law)
        consts = word.full_constants(k)
        nb = len(sigma)
        assign = np.array(list(itertools.product(range(J), repeat=nb)), dtype=int).reshape(-1, nb)
        # V_p = c_{2p} D_{t_p} c_{2p+1}, one matrix per step assignment
        V = [consts[2 * p] @ prof.step_values(word.diag[p])[assign[:, labels[p]]] @ consts[2 * p + 1] for p in range(m + 1)]
        total = np.zeros((assign.shape[0], k, k), dtype=complex)
        kraus = [self.models[s].kraus for s in word.matrix]
        for r in itertools.product(*[range(len(K)) for K in kraus]):
            sc = scalar_factor(entries, r, keys, self.oracles)
            if sc == 0:
                continue
            prod = V[0]
            for p in range(m):
                prod = prod @ kraus[p][r[p]] @ V[p + 1]
            total += sc * prod
        out: dict[tuple, np.ndarray] = {}
        counts = np.stack([np.bincount(a, minlength=J) for a in assign])
        for c, mat in zip(map(tuple, counts), total):
            out[c] = out.get(c, 0) + mat
        return out

    @property
    def terms(self) -> dict[tuple, np.ndarray]:
        if self._terms is None:
            agg: dict[tuple, np.ndarray] = {}
            for sigma in self.kernels():
                for key, mat in self.sigma_terms(sigma).items():
                    agg[key] = agg.get(key, 0) + mat
            self._terms = agg
        return self._terms

    def _evaluate(self, terms: Mapping[tuple, np.ndarray], n: int) -> np.ndarray:
        sizes = self.diag.step_sizes(n)
        k = self.diag.profile.dim
        out = np.zeros((k, k), dtype=complex)
        for key, mat in terms.items():
            weight = 1
            for size, c in zip(sizes, key):
                weight *= falling_factorial(size, c)
            if weight:
                out += weight * mat
        return out / float(n) ** (self.word.m / 2 + 1)

    def at(self, n: int) -> np.ndarray:
        return self._evaluate(self.terms, n)

    def sigma_contribution(self, sigma: SetPartition, n: int) -> np.ndarray:
        """Contribution of tuples with ``ker i == sigma`` (any ``sigma``, no filtering)."""
        return self._evaluate(self.sigma_terms(sigma), n)


def exact_moment(
    word: MixedWord,
    models: Mapping[Hashable, EntryModel],
    diag: FiniteDiagonal,
    n: int,
    law: str = "conditional",
    oracles: Mapping[Hashable, PureMomentOracle] | None = None,
) -> np.ndarray:
    """Exact ``E_n[D(t_1) Y(s_1) ... Y(s_m) D(t_{m+1})]`` for the realized matrices."""
    return ExactMoment(word, models, diag, law, oracles).at(n)
