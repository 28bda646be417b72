"""Shared oracle constructions for the test suite.

Everything here deliberately avoids the package's fast paths: gates are
built as dense matrices with explicit index bookkeeping, rotations go
through scipy's expm, and derivatives come from finite differences, so
agreement with the kernels is a genuine two-route check.
"""

import numpy as np
import scipy.linalg


def dense_two_qubit(u, qa, qb, n):
    """Full 2^n x 2^n matrix for a 4x4 gate on the ordered pair (qa, qb)."""
    dim = 1 << n
    full = np.zeros((dim, dim), dtype=np.complex128)
    pair_mask = (1 << qa) | (1 << qb)
    for col in range(dim):
        a = (col >> qa) & 1
        b = (col >> qb) & 1
        rest = col & ~pair_mask
        for a2 in (0, 1):
            for b2 in (0, 1):
                row = rest | (a2 << qa) | (b2 << qb)
                full[row, col] = u[2 * a2 + b2, 2 * a + b]
    return full


def dense_objective(inst, theta):
    """Evaluate f(theta) through dense matrices and expm only."""
    n = inst.n
    psi = np.zeros(1 << n, dtype=np.complex128)
    psi[0] = 1.0
    for i, layer in enumerate(inst.circuit.layers):
        for b, block in enumerate(layer.blocks):
            qa = int(layer.permutation[2 * b])
            qb = int(layer.permutation[2 * b + 1])
            psi = dense_two_qubit(block, qa, qb, n) @ psi
        if i < inst.m:
            gen = inst.circuit.generators[i].dense()
            psi = scipy.linalg.expm(-0.5j * theta[i] * gen) @ psi
    mat = inst.observable.dense()
    return float(np.real(psi.conj() @ (mat @ psi)))


def fd_gradient(f, x, h=1e-5):
    x = np.asarray(x, dtype=np.float64)
    g = np.empty(x.shape[0])
    for k in range(x.shape[0]):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2.0 * h)
    return g


def fd_hessian(f, x, h=1e-3):
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[0]
    hess = np.empty((m, m))
    f0 = f(x)
    for k in range(m):
        ek = np.zeros_like(x)
        ek[k] = h
        hess[k, k] = (f(x + ek) - 2.0 * f0 + f(x - ek)) / h ** 2
        for l in range(k + 1, m):
            el = np.zeros_like(x)
            el[l] = h
            val = (f(x + ek + el) - f(x + ek - el)
                   - f(x - ek + el) + f(x - ek - el)) / (4.0 * h ** 2)
            hess[k, l] = hess[l, k] = val
    return hess


def random_state(rng, n):
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return amps / np.linalg.norm(amps)
