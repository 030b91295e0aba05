"""Second-moment check for the extended model over ``B ⊗ M_N``.

A size-``K*N`` matrix over ``B`` is regrouped into ``K x K`` blocks
``A(i, j) = sum_{p,q} a(p + iN, q + jN) ⊗ e(p, q; N)``.  For ``n = K N``
and ``E[a(x, y) c a(y, x)] = eta(c) / n`` one gets

    E_{N,1}[A(i, j) b A(j, i)] = (1/K) eta((1/N) sum_p b_pp) ⊗ I_N.
"""
from __future__ import annotations

import numpy as np

from ..algebra import BlockMatrix, op_norm
from .entries import EntryModel

__all__ = ["cpm_lhs", "cpm_rhs", "cpm_rhs_unnormalized", "verify_matrix_cpm"]


def _as_grid(b, N: int, dim: int) -> np.ndarray:
    if isinstance(b, BlockMatrix):
        if b.size != N or b.dim != dim:
            raise ValueError(f"b must be {N}x{N} over M_{dim}")
        return b.blocks()
    arr = np.asarray(b, dtype=complex)
    if arr.shape != (N, N, dim, dim):
        raise ValueError(f"b must have block shape {(N, N, dim, dim)}, got {arr.shape}")
    return arr


def _pair_moment(model: EntryModel, x, y, z, w, n: int, c: np.ndarray) -> np.ndarray:
    """``E[a(x, y) c a(z, w)]`` from the covariance ``E[g_r(x,y) g_r'(z,w)] = [r = r'][(z,w) = (y,x)]``."""
    if (z, w) != (y, x):
        return np.zeros_like(c)
    return sum(K @ c @ K for K in model.kraus) / n


def cpm_lhs(model: EntryModel, N: int, K: int, b, i: int = 0, j: int = 0) -> BlockMatrix:
    """``E_{N,1}[A(i, j) b A(j, i)]`` evaluated exactly, as an ``N x N`` matrix over ``B``."""
    d = model.dim
    grid = _as_grid(b, N, d)
    n = K * N
    out = np.zeros((N, N, d, d), dtype=complex)
    for p in range(N):
        for q2 in range(N):
            acc = np.zeros((d, d), dtype=complex)
            for q in range(N):
                for p2 in range(N):
                    acc += _pair_moment(model, p + i * N, q + j * N, p2 + j * N, q2 + i * N, n, grid[q, p2])
            out[p, q2] = acc
    return BlockMatrix.from_blocks(out)


def cpm_rhs(model: EntryModel, N: int, K: int, b) -> BlockMatrix:
    grid = _as_grid(b, N, model.dim)
    tr = sum(grid[p, p] for p in range(N)) / N
    return BlockMatrix.scalar(model.eta(tr) / K, N)


def cpm_rhs_unnormalized(model: EntryModel, N: int, K: int, b) -> BlockMatrix:
    """``(1/K) eta(sum_p b_pp) ⊗ I_N``: larger than :func:`cpm_rhs` by exactly ``N``."""
    return cpm_rhs(model, N, K, b) * N


def verify_matrix_cpm(model: EntryModel, N: int, K: int, b):
    """Compare both sides for every block position ``(i, j)``.

    Returns ``(computed, expected, deviation)`` with ``computed`` the list of
    left sides in row-major ``(i, j)`` order and ``deviation`` the largest
    operator-norm gap.
    """
    if N < 1 or K < 1:
        raise ValueError("N and K must be positive")
    expected = cpm_rhs(model, N, K, b)
    computed = [cpm_lhs(model, N, K, b, i, j) for i in range(K) for j in range(K)]
    deviation = max(op_norm(c.data - expected.data) for c in computed)
    return computed, expected, deviation
