"""The base algebra ``B = M_k(C)``, Kraus-form CP maps and block-matrix expectations.

Elements of ``B`` are plain ``(k, k)`` complex ndarrays.  A matrix over ``B``
of size ``n`` is a :class:`BlockMatrix` wrapping the flat ``(n*k, n*k)``
array, with flat index ``i*k + alpha`` for block row ``i`` and inner row
``alpha``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "as_element",
    "identity",
    "op_norm",
    "is_selfadjoint",
    "CPMap",
    "BlockMatrix",
    "cond_exp_n",
    "cp_apply",
    "choi_matrix",
    "choi_psd_check",
    "extended_reshape",
    "extended_flatten",
    "cond_exp_N1",
    "cond_exp_Nk",
]


def as_element(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a square complex matrix; scalars become ``x * I``."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 0:
        return arr * np.eye(dim or 1, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def op_norm(x) -> float:
    """Operator norm (largest singular value)."""
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    if x.ndim < 2:
        return float(np.max(np.abs(x)))
    return float(np.linalg.norm(x, 2))


def is_selfadjoint(x, tol: float = 1e-12) -> bool:
    x = np.asarray(x)
    return bool(np.allclose(x, x.conj().T, atol=tol, rtol=0))


@dataclass(frozen=True)
class CPMap:
    """``eta(b) = sum_r K_r b K_r^*`` for a finite Kraus family."""

    kraus: tuple[np.ndarray, ...]

    def __init__(self, kraus: Sequence):
        ks = tuple(as_element(K) for K in kraus)
        if not ks:
            raise ValueError("a CP map needs at least one Kraus operator")
        dim = ks[0].shape[0]
        if any(K.shape != (dim, dim) for K in ks):
            raise ValueError("Kraus operators must share one dimension")
        object.__setattr__(self, "kraus", ks)

    @classmethod
    def identity(cls, dim: int = 1) -> "CPMap":
        return cls([np.eye(dim)])

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    @property
    def selfadjoint_kraus(self) -> bool:
        return all(is_selfadjoint(K) for K in self.kraus)

    def __call__(self, b) -> np.ndarray:
        return cp_apply(self, b)


def cp_apply(eta: CPMap, b) -> np.ndarray:
    b = np.asarray(b, dtype=complex)
    if b.shape != (eta.dim, eta.dim):
        raise ValueError(f"dimension mismatch: map on M_{eta.dim}, element of shape {b.shape}")
    out = np.zeros_like(b)
    for K in eta.kraus:
        out += K @ b @ K.conj().T
    return out


def choi_matrix(action: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """``sum_ij e_ij ⊗ action(e_ij)`` as a ``(dim², dim²)`` matrix."""
    C = np.zeros((dim * dim, dim * dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            C[i * dim : (i + 1) * dim, j * dim : (j + 1) * dim] = action(e)
    return C


def choi_psd_check(eta, tol: float = 1e-10, dim: int | None = None) -> bool:
    """True iff the Choi matrix of ``eta`` is PSD up to ``-tol``.

    ``eta`` may be a :class:`CPMap` or any linear callable on ``M_dim``
    (pass ``dim`` in that case).
    """
    if isinstance(eta, CPMap):
        dim = eta.dim
    elif dim is None:
        raise ValueError("dim is required for a raw action")
    C = choi_matrix(eta, dim)
    C = 0.5 * (C + C.conj().T)
    return bool(np.linalg.eigvalsh(C).min() >= -tol)


class BlockMatrix:
    """An ``n x n`` matrix with entries in ``M_k(C)``.

    Supports ``@``, ``+``, ``-``, scalar ``*`` and ``.adjoint()``; blocks are
    reached with ``x.block(i, j)`` (0-based).
    """

    __slots__ = ("data", "dim")

    def __init__(self, data, dim: int):
        data = np.asarray(data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] % dim:
            raise ValueError(f"flat data of shape {data.shape} is not a square matrix over M_{dim}")
        self.data = data
        self.dim = int(dim)

    @classmethod
    def from_blocks(cls, blocks) -> "BlockMatrix":
        arr = np.asarray(blocks, dtype=complex)
        n, n2, k, k2 = arr.shape
        if n != n2 or k != k2:
            raise ValueError("blocks must form an n x n grid of k x k matrices")
        return cls(arr.transpose(0, 2, 1, 3).reshape(n * k, n * k), k)

    @classmethod
    def scalar(cls, b, n: int) -> "BlockMatrix":
        """``b ⊗ I_n``: ``b`` repeated down the block diagonal."""
        b = as_element(b)
        return cls(np.kron(np.eye(n), b), b.shape[0])

    @classmethod
    def identity(cls, n: int, dim: int) -> "BlockMatrix":
        return cls(np.eye(n * dim, dtype=complex), dim)

    @property
    def size(self) -> int:
        return self.data.shape[0] // self.dim

    def blocks(self) -> np.ndarray:
        n, k = self.size, self.dim
        return self.data.reshape(n, k, n, k).transpose(0, 2, 1, 3)

    def block(self, i: int, j: int) -> np.ndarray:
        k = self.dim
        return self.data[i * k : (i + 1) * k, j * k : (j + 1) * k]

    def adjoint(self) -> "BlockMatrix":
        return BlockMatrix(self.data.conj().T, self.dim)

    def is_selfadjoint(self, tol: float = 0.0) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T), initial=0.0) <= tol)

    def _check(self, other: "BlockMatrix") -> None:
        if self.dim != other.dim or self.size != other.size:
            raise ValueError("block matrices of different shape")

    def __matmul__(self, other: "BlockMatrix") -> "BlockMatrix":
        self._check(other)
        return BlockMatrix(self.data @ other.data, self.dim)

    def __add__(self, other: "BlockMatrix") -> "BlockMatrix":
        self._check(other)
        return BlockMatrix(self.data + other.data, self.dim)

    def __sub__(self, other: "BlockMatrix") -> "BlockMatrix":
        self._check(other)
        return BlockMatrix(self.data - other.data, self.dim)

    def __mul__(self, c) -> "BlockMatrix":
        return BlockMatrix(self.data * c, self.dim)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"BlockMatrix(size={self.size}, dim={self.dim})"


def cond_exp_n(x: BlockMatrix) -> np.ndarray:
    """Normalized block trace ``(1/n) sum_i x_ii``."""
    n, k = x.size, x.dim
    diag = x.data.reshape(n, k, n, k)[np.arange(n), :, np.arange(n), :]
    return diag.mean(axis=0)


def extended_reshape(y: BlockMatrix, N: int) -> BlockMatrix:
    """Regroup a size-``K*N`` matrix over ``B`` as a size-``K`` matrix over ``B ⊗ M_N``.

    Block ``(i, j)`` of the result is ``sum_{p,q} y[p+iN, q+jN] ⊗ e(p,q;N)``,
    stored as an ``N x N`` grid of ``B``-blocks.
    """
    n = y.size
    if N < 1 or n % N:
        raise ValueError(f"size {n} is not divisible by N={N}")
    # flat index i*N*k + p*k + alpha is the same in both layouts
    return BlockMatrix(y.data.copy(), N * y.dim)


def extended_flatten(a: BlockMatrix, N: int) -> BlockMatrix:
    """Inverse of :func:`extended_reshape`."""
    if a.dim % N:
        raise ValueError(f"block dimension {a.dim} is not divisible by N={N}")
    return BlockMatrix(a.data.copy(), a.dim // N)


def cond_exp_N1(a, expectation: Callable[[np.ndarray], np.ndarray] | None = None) -> np.ndarray:
    """Entrywise expectation of an ``N x N`` matrix over ``B``.

    ``a`` is either a deterministic flat ``(N*k, N*k)`` array (returned
    unchanged) or an array of realizations with sample axis 0, reduced by
    ``expectation`` (default: sample mean).
    """
    arr = np.asarray(a.data if isinstance(a, BlockMatrix) else a, dtype=complex)
    if arr.ndim == 2:
        return arr.copy()
    if expectation is None:
        return arr.mean(axis=0)
    return np.asarray(expectation(arr), dtype=complex)


def cond_exp_Nk(x: BlockMatrix, N: int) -> np.ndarray:
    """``E_{N,K}`` on a deterministic size-``K`` matrix over ``B ⊗ M_N``."""
    if x.dim % N:
        raise ValueError("block dimension is not a multiple of N")
    return cond_exp_N1(cond_exp_n(x))
