"""Independent reference computations used only by the tests.

Scalar entry moments come from quadrature rules, not closed forms, and the
finite-n mixed moment is a plain loop over every index tuple.
"""
import itertools
import math

import numpy as np
from numpy.polynomial.hermite_e import hermegauss


def random_complex(rng, k):
    return rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))


def random_herm(rng, k):
    a = random_complex(rng, k)
    return (a + a.conj().T) / 2


def quadrature_moment(kind, diagonal, p, q):
    """E[g^p conj(g)^q] for one scalar entry, by exact quadrature."""
    deg = p + q
    if kind == "gaussian_hermitian":
        x, w = hermegauss(deg // 2 + 2)
        w = w / math.sqrt(2 * math.pi)
        if diagonal:
            return complex(np.sum(w * x ** deg))
        g = (x[:, None] + 1j * x[None, :]) / math.sqrt(2)
        return complex(np.sum(w[:, None] * w[None, :] * g ** p * np.conj(g) ** q))
    if kind == "circle":
        if diagonal:
            return complex(((1.0) ** deg + (-1.0) ** deg) / 2)
        L = deg + 1
        theta = 2 * np.pi * np.arange(L) / L
        return complex(np.mean(np.exp(1j * theta * (p - q))))
    raise ValueError(kind)


def exhaustive_moment(word, models, diag, n):
    """(1/n) sum over all closed index tuples of E[Pro_n], conditional law."""
    m = word.m
    k = diag.profile.dim
    consts = word.full_constants(k)
    steps = diag.step_of_index(n)
    dvals = [diag.profile.step_values(t) for t in word.diag]
    total = np.zeros((k, k), dtype=complex)
    kraus = [models[s].kraus for s in word.matrix]
    if m == 0:
        for i in range(n):
            total += consts[0] @ dvals[0][steps[i]] @ consts[1]
        return total / n
    for head in itertools.product(range(n), repeat=m):
        idx = list(head) + [head[0]]
        for r in itertools.product(*[range(len(K)) for K in kraus]):
            counts = {}
            for p in range(m):
                x, y = idx[p], idx[p + 1]
                key = (word.matrix[p], r[p], min(x, y), max(x, y))
                c = counts.setdefault(key, [0, 0])
                c[0 if x <= y else 1] += 1
            scalar = 1.0
            for (s, _, x, y), (a, b) in counts.items():
                scalar *= quadrature_moment(models[s].kind, x == y, a, b)
            if abs(scalar) < 1e-14:
                continue
            prod = consts[0] @ dvals[0][steps[idx[0]]] @ consts[1]
            for p in range(m):
                prod = prod @ kraus[p][r[p]] @ consts[2 * p + 2] @ dvals[p + 1][steps[idx[p + 1]]] @ consts[2 * p + 3]
            total += scalar * prod
    return total / n ** (m / 2 + 1)


def classical_scalar_oracle(moments):
    """Oracle for classically independent commuting scalars: E[prod] = prod_s E[x_s^{count}].

    ``moments[s]`` is a sequence with ``moments[s][k] = E[x_s^k]``.
    """
    def oracle(symbols, constants):
        scale = np.prod([complex(np.asarray(c).reshape(-1)[0]) for c in constants])
        counts = {}
        for s in symbols:
            counts[s] = counts.get(s, 0) + 1
        val = 1.0
        for s, c in counts.items():
            val *= moments[s][c]
        return np.array([[scale * val]], dtype=complex)

    return oracle


def partial_state_oracle(mats, k, xi):
    """B-valued oracle on M_k ⊗ M_D with E = id ⊗ <xi, . xi>.

    ``mats[s]`` is a (k D) x (k D) matrix in Kronecker layout ``b ⊗ x``;
    constants ``b`` act as ``b ⊗ I_D``.  This is a genuine conditional
    expectation onto M_k, hence bimodular.
    """
    D = xi.size

    def oracle(symbols, constants):
        eyeD = np.eye(D)
        prod = np.kron(constants[0], eyeD)
        for s, c in zip(symbols, constants[1:]):
            prod = prod @ mats[s] @ np.kron(c, eyeD)
        blocks = prod.reshape(k, D, k, D)
        return np.einsum("d,adbe,e->ab", xi.conj(), blocks, xi)

    return oracle


def random_partial_state_oracle(rng, symbols, k, D=3):
    mats = {s: random_complex(rng, k * D) for s in symbols}
    xi = random_complex(rng, D)[:, 0]
    return partial_state_oracle(mats, k, xi / np.linalg.norm(xi))


def boolean_pair_oracle(a, b):
    """Two Boolean independent scalar variables on C ⊕ C ⊕ C with the state at e0.

    ``a`` and ``b`` are 2x2 Hermitian matrices acting on span(e0, e1) and
    span(e0, e2) respectively.
    """
    X = np.zeros((3, 3), dtype=complex)
    Y = np.zeros((3, 3), dtype=complex)
    X[np.ix_([0, 1], [0, 1])] = a
    Y[np.ix_([0, 2], [0, 2])] = b
    mats = {1: X, 2: Y}

    def oracle(symbols, constants):
        prod = complex(np.asarray(constants[0]).reshape(-1)[0]) * np.eye(3, dtype=complex)
        for s, c in zip(symbols, constants[1:]):
            prod = prod @ mats[s] * complex(np.asarray(c).reshape(-1)[0])
        return np.array([[prod[0, 0]]], dtype=complex)

    return oracle
