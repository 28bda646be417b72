"""Competitor models: parameter-shift gradients and the QAD surrogate.

The analytic-descent surrogate is a trigonometric product model around
the base point p. With v = theta - p it reads

    E(v) = e0 A(v) + sum_k g_k B_k(v) + sum_k h_k C_k(v)
           + sum_{k<l} H_kl D_kl(v)

with A = prod cos^2(v_j/2), B_k = sin(v_k) prod_{j!=k} cos^2(v_j/2),
C_k = sin^2(v_k/2) prod_{j!=k} cos^2(v_j/2) and
D_kl = sin(v_k) sin(v_l) prod_{j!=k,l} cos^2(v_j/2). It agrees with f
exactly along every single coordinate axis through p and to second
order at p, at a cost of 2m^2 + m + 1 evaluations.
"""

from __future__ import annotations

import numpy as np

from . import kernels


def parameter_shift_gradient(inst, theta) -> np.ndarray:
    """Exact gradient from 2m evaluations at +-pi/2 shifts.

    Valid because every generator is a Pauli string (eigenvalues +-1):
    d_k f = (f(theta + pi/2 e_k) - f(theta - pi/2 e_k)) / 2.
    """
    theta = np.ascontiguousarray(theta, dtype=np.float64)
    m = inst.m
    if theta.shape != (m,):
        raise ValueError(f"theta must have shape ({m},)")
    grad = np.empty(m)
    for k in range(m):
        shift = np.zeros(m)
        shift[k] = 0.5 * np.pi
        grad[k] = 0.5 * (inst.evaluate(theta + shift) - inst.evaluate(theta - shift))
    return grad


class QadSurrogate:
    __slots__ = ("p", "e0", "axis_gradients", "axis_values", "cross")

    def __init__(self, p, e0, axis_gradients, axis_values, cross):
        p = np.ascontiguousarray(p, dtype=np.float64)
        m = p.shape[0]
        axis_gradients = np.ascontiguousarray(axis_gradients, dtype=np.float64)
        axis_values = np.ascontiguousarray(axis_values, dtype=np.float64)
        cross = np.ascontiguousarray(cross, dtype=np.float64)
        if axis_gradients.shape != (m,) or axis_values.shape != (m,):
            raise ValueError("axis coefficient shape mismatch")
        if cross.shape != (m, m) or not np.array_equal(cross, cross.T):
            raise ValueError("cross matrix must be symmetric (m, m)")
        self.p = p
        self.e0 = float(e0)
        self.axis_gradients = axis_gradients
        self.axis_values = axis_values
        self.cross = cross

    @property
    def m(self) -> int:
        return self.p.shape[0]

    def _theta(self, theta) -> np.ndarray:
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (self.m,):
            raise ValueError(f"theta must have shape ({self.m},)")
        return theta

    def value(self, theta) -> float:
        return kernels.qad_value(self._theta(theta), self.p, self.e0,
                                 self.axis_gradients, self.axis_values, self.cross)

    def gradient(self, theta) -> np.ndarray:
        return kernels.qad_value_grad(self._theta(theta), self.p, self.e0,
                                      self.axis_gradients, self.axis_values,
                                      self.cross)[1]

    def value_and_gradient(self, theta):
        return kernels.qad_value_grad(self._theta(theta), self.p, self.e0,
                                      self.axis_gradients, self.axis_values,
                                      self.cross)

    def _inner_plain(self, x, lr, nsteps):
        return kernels.qad_inner_plain(x, self.p, self.e0, self.axis_gradients,
                                       self.axis_values, self.cross, lr, nsteps)


def build_qad_surrogate(inst, p) -> QadSurrogate:
    """Measure the 2m^2 + m + 1 coefficients of the QAD model at p.

    Order: e0, the 2m gradient shifts, the m pi-shifts, then the 4
    double shifts per pair (k < l) that assemble the mixed second
    derivative H_kl by the two-parameter shift rule.
    """
    p = np.ascontiguousarray(p, dtype=np.float64)
    m = inst.m
    if p.shape != (m,):
        raise ValueError(f"base point must have shape ({m},)")
    e0 = inst.evaluate(p)
    g = parameter_shift_gradient(inst, p)
    h = np.empty(m)
    for k in range(m):
        shift = np.zeros(m)
        shift[k] = np.pi
        h[k] = inst.evaluate(p + shift)
    cross = np.zeros((m, m))
    half = 0.5 * np.pi
    for k in range(m):
        for l in range(k + 1, m):
            sk = np.zeros(m)
            sk[k] = half
            sl = np.zeros(m)
            sl[l] = half
            val = (inst.evaluate(p + sk + sl) - inst.evaluate(p + sk - sl)
                   - inst.evaluate(p - sk + sl) + inst.evaluate(p - sk - sl)) / 4.0
            cross[k, l] = cross[l, k] = val
    return QadSurrogate(p, e0, g, h, cross)
