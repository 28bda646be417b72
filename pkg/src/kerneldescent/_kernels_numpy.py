"""Vectorized numpy fallbacks for the compiled kernels.

Signature-compatible with ``_kernels_numba``; selected when numba is
unavailable or disabled via KERNELDESCENT_NUMBA=0. Correctness parity
with the numba path is covered by tests; speed parity is not a goal.
"""

import math

import numpy as np

BACKEND = "numpy"


def _parity_signs(x):
    x = x.copy()
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return np.where(x & 1, -1.0, 1.0)


def apply_two_qubit_inplace(amps, u, qa, qb):
    n = amps.shape[0].bit_length() - 1
    t = amps.reshape((2,) * n)
    axa = n - 1 - qa
    axb = n - 1 - qb
    t = np.moveaxis(t, (axa, axb), (0, 1))
    shp = t.shape
    res = (u @ t.reshape(4, -1)).reshape(shp)
    res = np.moveaxis(res, (0, 1), (axa, axb))
    amps[:] = res.reshape(-1)


def apply_pauli_inplace(amps, flip, zy, phase):
    idx = np.arange(amps.shape[0], dtype=np.int64)
    src = idx ^ flip
    signs = _parity_signs(src & zy)
    amps[:] = phase * signs * amps[src]


def apply_pauli_rotation_inplace(amps, flip, zy, phase, c, s):
    idx = np.arange(amps.shape[0], dtype=np.int64)
    src = idx ^ flip
    signs = _parity_signs(src & zy)
    amps[:] = c * amps + (-1j * s * phase) * signs * amps[src]


def pauli_bracket(amps, flip, zy, phase):
    idx = np.arange(amps.shape[0], dtype=np.int64)
    src = idx ^ flip
    signs = _parity_signs(src & zy)
    return complex(phase * np.sum(np.conj(amps) * signs * amps[src]))


def prepare_objective_state(n, perms, blocks, gen_flip, gen_zy, gen_phase, theta):
    amps = np.zeros(1 << n, np.complex128)
    amps[0] = 1.0
    m = gen_flip.shape[0]
    nblocks = blocks.shape[1]
    for layer in range(m + 1):
        for b in range(nblocks):
            qa = int(perms[layer, 2 * b])
            qb = int(perms[layer, 2 * b + 1])
            apply_two_qubit_inplace(amps, blocks[layer, b], qa, qb)
        if layer < m:
            half = 0.5 * theta[layer]
            apply_pauli_rotation_inplace(
                amps, int(gen_flip[layer]), int(gen_zy[layer]), gen_phase[layer],
                math.cos(half), math.sin(half),
            )
    return amps


def objective_eval(n, perms, blocks, gen_flip, gen_zy, gen_phase, theta,
                   obs_flip, obs_zy, obs_phase, obs_coeff):
    amps = prepare_objective_state(n, perms, blocks, gen_flip, gen_zy, gen_phase, theta)
    total = 0.0
    max_im = 0.0
    for t in range(obs_coeff.shape[0]):
        br = pauli_bracket(amps, int(obs_flip[t]), int(obs_zy[t]), obs_phase[t])
        max_im = max(max_im, abs(br.imag))
        total += obs_coeff[t] * br.real
    nrm = float(np.sum(amps.real ** 2 + amps.imag ** 2))
    return total, max_im, nrm


# ---------------------------------------------------------------------------
# kernel surrogate


def _skip_products(f):
    d, m = f.shape
    pre = np.ones((d, m + 1))
    np.cumprod(f, axis=1, out=pre[:, 1:])
    suf = np.ones((d, m + 1))
    suf[:, :-1] = np.cumprod(f[:, ::-1], axis=1)[:, ::-1]
    return pre, suf


def kd_value(theta, anchors, values):
    f = (1.0 + 2.0 * np.cos(theta[None, :] - anchors)) / 3.0
    return float(values @ np.prod(f, axis=1))


def kd_value_grad(theta, anchors, values):
    u = theta[None, :] - anchors
    f = (1.0 + 2.0 * np.cos(u)) / 3.0
    df = -2.0 * np.sin(u) / 3.0
    pre, suf = _skip_products(f)
    total = float(values @ pre[:, -1])
    grad = np.einsum("j,ji,ji->i", values, df, pre[:, :-1] * suf[:, 1:])
    return total, grad


def kd_inner_fixed(theta, anchors, values, step_len, eps, k):
    x = theta.copy()
    path = 0.0
    for _ in range(k):
        _, g = kd_value_grad(x, anchors, values)
        delta = (step_len / (math.sqrt(g @ g) + eps)) * g
        x -= delta
        path += math.sqrt(delta @ delta)
    return x, path


def kd_inner_plain(theta, anchors, values, lr, nsteps):
    x = theta.copy()
    for _ in range(nsteps):
        _, g = kd_value_grad(x, anchors, values)
        x -= lr * g
    return x


# ---------------------------------------------------------------------------
# QAD surrogate


def _qad_terms(theta, p, e0, g, h, hmat):
    m = theta.shape[0]
    v = theta - p
    c = np.cos(0.5 * v) ** 2
    t2 = np.sin(0.5 * v) ** 2
    s = np.sin(v)
    dc = -0.5 * s
    dt2 = 0.5 * s
    ds = np.cos(v)
    pairs = [(k, l) for k in range(m) for l in range(k + 1, m)]
    nterms = 1 + 2 * m + len(pairs)
    psi = np.tile(c, (nterms, 1))
    dpsi = np.tile(dc, (nterms, 1))
    w = np.empty(nterms)
    w[0] = e0
    row = 1
    for k in range(m):
        psi[row, k] = s[k]
        dpsi[row, k] = ds[k]
        w[row] = g[k]
        row += 1
        psi[row, k] = t2[k]
        dpsi[row, k] = dt2[k]
        w[row] = h[k]
        row += 1
    for k, l in pairs:
        psi[row, [k, l]] = s[[k, l]]
        dpsi[row, [k, l]] = ds[[k, l]]
        w[row] = hmat[k, l]
        row += 1
    return psi, dpsi, w


def qad_value(theta, p, e0, g, h, hmat):
    psi, _, w = _qad_terms(theta, p, e0, g, h, hmat)
    return float(w @ np.prod(psi, axis=1))


def qad_value_grad(theta, p, e0, g, h, hmat):
    psi, dpsi, w = _qad_terms(theta, p, e0, g, h, hmat)
    pre, suf = _skip_products(psi)
    total = float(w @ pre[:, -1])
    grad = np.einsum("j,ji,ji->i", w, dpsi, pre[:, :-1] * suf[:, 1:])
    return total, grad


def qad_inner_plain(theta, p, e0, g, h, hmat, lr, nsteps):
    x = theta.copy()
    for _ in range(nsteps):
        _, grad = qad_value_grad(x, p, e0, g, h, hmat)
        x -= lr * grad
    return x
