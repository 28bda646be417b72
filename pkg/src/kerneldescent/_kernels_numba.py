"""Numba implementations of the hot numeric kernels.

Every function here has a vectorized twin with the same name and
signature in ``_kernels_numpy``; ``kernels`` picks one module at import
time. Pauli strings arrive as bit masks: ``flip`` marks qubits whose
basis bit is toggled (X or Y letters), ``zy`` marks qubits contributing
a parity sign (Z or Y), and ``phase`` is i**(#Y).
"""

import math

import numpy as np
from numba import njit

BACKEND = "numba"


@njit(cache=True, inline="always")
def _parity(x):
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x & 1


@njit(cache=True)
def apply_two_qubit_inplace(amps, u, qa, qb):
    # u acts on the ordered pair (qa, qb); row/column index is 2*a + b
    # where a, b are the basis bits of qa, qb.
    ba = np.int64(1) << qa
    bb = np.int64(1) << qb
    mask = ba | bb
    for i in range(amps.shape[0]):
        if i & mask == 0:
            i01 = i | bb
            i10 = i | ba
            i11 = i | mask
            a00 = amps[i]
            a01 = amps[i01]
            a10 = amps[i10]
            a11 = amps[i11]
            amps[i] = u[0, 0] * a00 + u[0, 1] * a01 + u[0, 2] * a10 + u[0, 3] * a11
            amps[i01] = u[1, 0] * a00 + u[1, 1] * a01 + u[1, 2] * a10 + u[1, 3] * a11
            amps[i10] = u[2, 0] * a00 + u[2, 1] * a01 + u[2, 2] * a10 + u[2, 3] * a11
            amps[i11] = u[3, 0] * a00 + u[3, 1] * a01 + u[3, 2] * a10 + u[3, 3] * a11


@njit(cache=True)
def apply_pauli_inplace(amps, flip, zy, phase):
    if flip == 0:
        for i in range(amps.shape[0]):
            s = -1.0 if _parity(i & zy) else 1.0
            amps[i] = phase * s * amps[i]
    else:
        for i in range(amps.shape[0]):
            j = i ^ flip
            if j > i:
                si = -1.0 if _parity(i & zy) else 1.0
                sj = -1.0 if _parity(j & zy) else 1.0
                ai = amps[i]
                amps[i] = phase * sj * amps[j]
                amps[j] = phase * si * ai


@njit(cache=True)
def apply_pauli_rotation_inplace(amps, flip, zy, phase, c, s):
    # exp(-i*angle/2 * P) with c = cos(angle/2), s = sin(angle/2):
    # new = c*psi - i*s*(P psi), exact because P*P = I.
    w = -1j * s * phase
    if flip == 0:
        for i in range(amps.shape[0]):
            sg = -1.0 if _parity(i & zy) else 1.0
            amps[i] = (c + w * sg) * amps[i]
    else:
        for i in range(amps.shape[0]):
            j = i ^ flip
            if j > i:
                si = -1.0 if _parity(i & zy) else 1.0
                sj = -1.0 if _parity(j & zy) else 1.0
                ai = amps[i]
                aj = amps[j]
                amps[i] = c * ai + w * sj * aj
                amps[j] = c * aj + w * si * ai


@njit(cache=True)
def pauli_bracket(amps, flip, zy, phase):
    acc = 0.0j
    for i in range(amps.shape[0]):
        j = i ^ flip
        sg = -1.0 if _parity(j & zy) else 1.0
        acc += np.conj(amps[i]) * (sg * amps[j])
    return phase * acc


@njit(cache=True)
def prepare_objective_state(n, perms, blocks, gen_flip, gen_zy, gen_phase, theta):
    dim = np.int64(1) << n
    amps = np.zeros(dim, np.complex128)
    amps[0] = 1.0
    m = gen_flip.shape[0]
    nblocks = blocks.shape[1]
    for layer in range(m + 1):
        for b in range(nblocks):
            qa = perms[layer, 2 * b]
            qb = perms[layer, 2 * b + 1]
            apply_two_qubit_inplace(amps, blocks[layer, b], qa, qb)
        if layer < m:
            half = 0.5 * theta[layer]
            apply_pauli_rotation_inplace(
                amps, gen_flip[layer], gen_zy[layer], gen_phase[layer],
                math.cos(half), math.sin(half),
            )
    return amps


@njit(cache=True)
def objective_eval(n, perms, blocks, gen_flip, gen_zy, gen_phase, theta,
                   obs_flip, obs_zy, obs_phase, obs_coeff):
    amps = prepare_objective_state(n, perms, blocks, gen_flip, gen_zy, gen_phase, theta)
    total = 0.0
    max_im = 0.0
    for t in range(obs_coeff.shape[0]):
        br = pauli_bracket(amps, obs_flip[t], obs_zy[t], obs_phase[t])
        im = abs(br.imag)
        if im > max_im:
            max_im = im
        total += obs_coeff[t] * br.real
    nrm = 0.0
    for i in range(amps.shape[0]):
        nrm += amps[i].real * amps[i].real + amps[i].imag * amps[i].imag
    return total, max_im, nrm


# ---------------------------------------------------------------------------
# kernel surrogate: f~(theta) = sum_j values[j] * prod_i (1+2cos(theta_i-a_ji))/3


@njit(cache=True)
def kd_value(theta, anchors, values):
    d, m = anchors.shape
    total = 0.0
    for j in range(d):
        prod = 1.0
        for i in range(m):
            prod *= (1.0 + 2.0 * math.cos(theta[i] - anchors[j, i])) / 3.0
        total += values[j] * prod
    return total


@njit(cache=True)
def kd_value_grad(theta, anchors, values):
    # Gradients through prefix/suffix products: no division, so factors
    # that are exactly zero (shift grid points) stay exact.
    d, m = anchors.shape
    total = 0.0
    grad = np.zeros(m)
    f = np.empty(m)
    df = np.empty(m)
    pre = np.empty(m + 1)
    suf = np.empty(m + 1)
    for j in range(d):
        for i in range(m):
            u = theta[i] - anchors[j, i]
            f[i] = (1.0 + 2.0 * math.cos(u)) / 3.0
            df[i] = -2.0 * math.sin(u) / 3.0
        pre[0] = 1.0
        for i in range(m):
            pre[i + 1] = pre[i] * f[i]
        suf[m] = 1.0
        for i in range(m - 1, -1, -1):
            suf[i] = suf[i + 1] * f[i]
        w = values[j]
        total += w * pre[m]
        for i in range(m):
            grad[i] += w * df[i] * pre[i] * suf[i + 1]
    return total, grad


@njit(cache=True)
def kd_inner_fixed(theta, anchors, values, step_len, eps, k):
    x = theta.copy()
    path = 0.0
    for _ in range(k):
        _, g = kd_value_grad(x, anchors, values)
        nrm = 0.0
        for i in range(g.shape[0]):
            nrm += g[i] * g[i]
        nrm = math.sqrt(nrm)
        scale = step_len / (nrm + eps)
        step_sq = 0.0
        for i in range(x.shape[0]):
            delta = scale * g[i]
            x[i] -= delta
            step_sq += delta * delta
        path += math.sqrt(step_sq)
    return x, path


@njit(cache=True)
def kd_inner_plain(theta, anchors, values, lr, nsteps):
    x = theta.copy()
    for _ in range(nsteps):
        _, g = kd_value_grad(x, anchors, values)
        for i in range(x.shape[0]):
            x[i] -= lr * g[i]
    return x


# ---------------------------------------------------------------------------
# QAD surrogate: trigonometric product model around p with coefficients
# (e0, axis gradients g, axis values h, symmetric cross matrix hmat).


@njit(cache=True, inline="always")
def _accum_term(w, psi, dpsi, pre, suf, grad):
    m = psi.shape[0]
    pre[0] = 1.0
    for i in range(m):
        pre[i + 1] = pre[i] * psi[i]
    suf[m] = 1.0
    for i in range(m - 1, -1, -1):
        suf[i] = suf[i + 1] * psi[i]
    for i in range(m):
        grad[i] += w * dpsi[i] * pre[i] * suf[i + 1]
    return w * pre[m]


@njit(cache=True)
def qad_value_grad(theta, p, e0, g, h, hmat):
    m = theta.shape[0]
    c = np.empty(m)
    dc = np.empty(m)
    s = np.empty(m)
    ds = np.empty(m)
    t2 = np.empty(m)
    dt2 = np.empty(m)
    for i in range(m):
        v = theta[i] - p[i]
        ch = math.cos(0.5 * v)
        sh = math.sin(0.5 * v)
        sv = math.sin(v)
        c[i] = ch * ch
        t2[i] = sh * sh
        s[i] = sv
        dc[i] = -0.5 * sv
        dt2[i] = 0.5 * sv
        ds[i] = math.cos(v)
    grad = np.zeros(m)
    psi = c.copy()
    dpsi = dc.copy()
    pre = np.empty(m + 1)
    suf = np.empty(m + 1)
    total = _accum_term(e0, psi, dpsi, pre, suf, grad)
    for k in range(m):
        psi[k] = s[k]
        dpsi[k] = ds[k]
        total += _accum_term(g[k], psi, dpsi, pre, suf, grad)
        psi[k] = t2[k]
        dpsi[k] = dt2[k]
        total += _accum_term(h[k], psi, dpsi, pre, suf, grad)
        psi[k] = c[k]
        dpsi[k] = dc[k]
    for k in range(m):
        psi[k] = s[k]
        dpsi[k] = ds[k]
        for l in range(k + 1, m):
            psi[l] = s[l]
            dpsi[l] = ds[l]
            total += _accum_term(hmat[k, l], psi, dpsi, pre, suf, grad)
            psi[l] = c[l]
            dpsi[l] = dc[l]
        psi[k] = c[k]
        dpsi[k] = dc[k]
    return total, grad


@njit(cache=True)
def qad_value(theta, p, e0, g, h, hmat):
    m = theta.shape[0]
    c = np.empty(m)
    s = np.empty(m)
    t2 = np.empty(m)
    for i in range(m):
        v = theta[i] - p[i]
        ch = math.cos(0.5 * v)
        sh = math.sin(0.5 * v)
        c[i] = ch * ch
        t2[i] = sh * sh
        s[i] = math.sin(v)
    pre = np.empty(m + 1)
    suf = np.empty(m + 1)
    pre[0] = 1.0
    for i in range(m):
        pre[i + 1] = pre[i] * c[i]
    suf[m] = 1.0
    for i in range(m - 1, -1, -1):
        suf[i] = suf[i + 1] * c[i]
    total = e0 * pre[m]
    for k in range(m):
        skip = pre[k] * suf[k + 1]
        total += (g[k] * s[k] + h[k] * t2[k]) * skip
    for k in range(m):
        for l in range(k + 1, m):
            prod = 1.0
            for i in range(m):
                if i != k and i != l:
                    prod *= c[i]
            total += hmat[k, l] * s[k] * s[l] * prod
    return total


@njit(cache=True)
def qad_inner_plain(theta, p, e0, g, h, hmat, lr, nsteps):
    x = theta.copy()
    for _ in range(nsteps):
        _, grad = qad_value_grad(x, p, e0, g, h, hmat)
        for i in range(x.shape[0]):
            x[i] -= lr * grad[i]
    return x
