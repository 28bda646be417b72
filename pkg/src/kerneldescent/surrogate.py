"""Kernel surrogates of circuit objectives.

The reproducing kernel is a product of shifted cosines,

    K~(x, z) = prod_j (1 + 2 cos(x_j - z_j)) / 3,

whose RKHS H is exactly the span of e^{i w.z} over frequency vectors
w in {-1, 0, 1}^m with conjugate-symmetric coefficients. Circuit
objectives live in H as functions of any parameter subset, which is
what makes interpolation on the 2pi/3 shift grid exact: the kernel
sections centered on that grid are H-orthonormal (after scaling), so
the interpolation weights are just the sampled values, and a surrogate
built from D = sum_k 2^k C(m,k) evaluations

  * reproduces f exactly on every subspace spanned by <= L coordinate
    axes through the base point, and
  * matches all partial derivatives of f at the base point up to
    order L.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import kernels

SHIFT_STEP = 2.0 * np.pi / 3.0

FOURIER_MAX_M = 8

_GRAM_EIG_RTOL = 1e-10


def kernel_ktilde(x, z) -> float:
    """Unnormalized product kernel K~."""
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ValueError("kernel arguments must share a shape")
    return float(np.prod((1.0 + 2.0 * np.cos(x - z)) / 3.0))


def kernel_k(x, z) -> float:
    """Normalized kernel K = (3/(2 pi))^m K~ (unit H-norm sections)."""
    m = np.asarray(x).shape[-1] if np.asarray(x).ndim else 1
    return (3.0 / (2.0 * np.pi)) ** m * kernel_ktilde(x, z)


def shift_count(m: int, order: int) -> int:
    """D = sum_{k=0}^{L} 2^k C(m, k)."""
    return sum((1 << k) * math.comb(m, k) for k in range(order + 1))


def enumerate_shifts(m: int, order: int, spacing: float = SHIFT_STEP) -> np.ndarray:
    """All shift vectors with at most ``order`` nonzero coordinates.

    Coordinates take values in {0, -spacing, +spacing}; rows come out in
    lexicographic order under the per-coordinate order 0 < -s < +s, so
    the zero shift is always row 0.
    """
    if not 1 <= order <= m:
        raise ValueError(f"order must satisfy 1 <= order <= m, got {order} for m={m}")
    out = np.zeros((shift_count(m, order), m))
    row = np.zeros(m)
    pos = 0

    def rec(i: int, used: int):
        nonlocal pos
        if i == m:
            out[pos] = row
            pos += 1
            return
        row[i] = 0.0
        rec(i + 1, used)
        if used < order:
            row[i] = -spacing
            rec(i + 1, used + 1)
            row[i] = spacing
            rec(i + 1, used + 1)
            row[i] = 0.0

    rec(0, 0)
    return out


@dataclass(frozen=True)
class ShiftSet:
    m: int
    order: int
    shifts: np.ndarray

    @property
    def size(self) -> int:
        return self.shifts.shape[0]


def shift_set(m: int, order: int) -> ShiftSet:
    return ShiftSet(m, order, enumerate_shifts(m, order))


class KernelSurrogate:
    """Local model f~(theta) = sum_j values[j] K~(p + q_j, theta).

    Thanks to the orthonormality of the grid sections no linear solve is
    needed: the weights equal the sampled values.
    """

    __slots__ = ("p", "order", "shifts", "anchors", "values")

    def __init__(self, p, order, shifts, values):
        p = np.ascontiguousarray(p, dtype=np.float64)
        shifts = np.ascontiguousarray(shifts, dtype=np.float64)
        values = np.ascontiguousarray(values, dtype=np.float64)
        if shifts.ndim != 2 or shifts.shape[1] != p.shape[0]:
            raise ValueError("shift/base-point dimension mismatch")
        if values.shape != (shifts.shape[0],):
            raise ValueError("one value per shift required")
        self.p = p
        self.order = order
        self.shifts = shifts
        self.anchors = np.ascontiguousarray(p[None, :] + shifts)
        self.values = values

    @property
    def m(self) -> int:
        return self.p.shape[0]

    def _theta(self, theta) -> np.ndarray:
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (self.m,):
            raise ValueError(f"theta must have shape ({self.m},)")
        return theta

    def value(self, theta) -> float:
        return kernels.kd_value(self._theta(theta), self.anchors, self.values)

    def gradient(self, theta) -> np.ndarray:
        return kernels.kd_value_grad(self._theta(theta), self.anchors, self.values)[1]

    def value_and_gradient(self, theta):
        return kernels.kd_value_grad(self._theta(theta), self.anchors, self.values)

    # fast inner-loop hooks used by the descent module
    def _inner_plain(self, x, lr, nsteps):
        return kernels.kd_inner_plain(x, self.anchors, self.values, lr, nsteps)

    def _inner_fixed(self, x, step_len, eps, k):
        return kernels.kd_inner_fixed(x, self.anchors, self.values, step_len, eps, k)

    def to_json(self) -> str:
        doc = {
            "format": "kerneldescent-surrogate-v1",
            "p": [float(v) for v in self.p],
            "order": self.order,
            "values": [float(v) for v in self.values],
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "KernelSurrogate":
        doc = json.loads(text)
        if doc.get("format") != "kerneldescent-surrogate-v1":
            raise ValueError(f"unrecognized format tag: {doc.get('format')!r}")
        p = np.array(doc["p"], dtype=np.float64)
        order = int(doc["order"])
        shifts = enumerate_shifts(p.shape[0], order)
        return cls(p, order, shifts, np.array(doc["values"], dtype=np.float64))


def build_surrogate(inst, p, order: int) -> KernelSurrogate:
    """Sample f on the order-L shift grid around p (D evaluations)."""
    p = np.ascontiguousarray(p, dtype=np.float64)
    if p.shape != (inst.m,):
        raise ValueError(f"base point must have shape ({inst.m},)")
    shifts = enumerate_shifts(inst.m, order)
    values = np.array([inst.evaluate(p + q) for q in shifts])
    return KernelSurrogate(p, order, shifts, values)


class GeneralSurrogate:
    """Surrogate from arbitrary sample points via the Gram system."""

    __slots__ = ("points", "eta")

    def __init__(self, points, eta):
        self.points = np.ascontiguousarray(points, dtype=np.float64)
        self.eta = np.ascontiguousarray(eta, dtype=np.float64)

    def value(self, theta) -> float:
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        return kernels.kd_value(theta, self.points, self.eta)


def build_surrogate_general(points, values) -> GeneralSurrogate:
    """Minimum-norm interpolant through arbitrary points.

    Solves Gram @ eta = values with an eigendecomposition pseudo-inverse
    (relative eigenvalue cutoff 1e-10), so duplicated or otherwise
    degenerate point sets stay well defined: the predicted function is
    unique even when eta is not.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    values = np.ascontiguousarray(values, dtype=np.float64)
    if points.ndim != 2 or values.shape != (points.shape[0],):
        raise ValueError("need points (D, m) and values (D,)")
    d = points.shape[0]
    gram = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            gram[i, j] = gram[j, i] = kernel_ktilde(points[i], points[j])
    w, v = np.linalg.eigh(gram)
    cutoff = _GRAM_EIG_RTOL * max(w.max(), 0.0)
    inv = np.where(w > cutoff, 1.0 / np.where(w > cutoff, w, 1.0), 0.0)
    eta = v @ (inv * (v.T @ values))
    return GeneralSurrogate(points, eta)


# ---------------------------------------------------------------------------
# Fourier-side tools (test and analysis support; capped at small m since
# the coefficient tensor has 3^m entries)


class FourierForm:
    """Trig polynomial sum_w c_w e^{i w.z}, w in {-1,0,1}^m.

    ``coeffs`` has shape (3,)*m indexed by w+1 per coordinate.
    """

    __slots__ = ("m", "coeffs")

    def __init__(self, m: int, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (3,) * m:
            raise ValueError(f"coeffs must have shape {(3,) * m}")
        self.m = m
        self.coeffs = coeffs

    def value(self, z) -> complex:
        z = np.asarray(z, dtype=np.float64)
        freqs = np.array(list(np.ndindex(self.coeffs.shape)), dtype=np.float64) - 1.0
        return complex(self.coeffs.ravel() @ np.exp(1j * (freqs @ z)))

    def is_conjugate_symmetric(self, tol: float = 1e-12) -> bool:
        flipped = self.coeffs[(slice(None, None, -1),) * self.m]
        return bool(np.all(np.abs(self.coeffs - np.conj(flipped)) <= tol))


def fourier_of_kernel_mix(anchors, weights) -> FourierForm:
    """Fourier coefficients of sum_j weights[j] K~(anchors[j], .)."""
    anchors = np.asarray(anchors, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    d, m = anchors.shape
    if m > FOURIER_MAX_M:
        raise ValueError(f"Fourier form capped at m={FOURIER_MAX_M}, got {m}")
    coeffs = np.zeros((3,) * m, dtype=np.complex128)
    for j in range(d):
        acc = np.asarray(weights[j], dtype=np.complex128)
        for i in range(m):
            a = anchors[j, i]
            acc = np.multiply.outer(
                acc, np.array([np.exp(1j * a), 1.0, np.exp(-1j * a)]) / 3.0)
        coeffs += acc
    return FourierForm(m, coeffs)


def fourier_coefficients(surr) -> FourierForm:
    if isinstance(surr, KernelSurrogate):
        return fourier_of_kernel_mix(surr.anchors, surr.values)
    if isinstance(surr, GeneralSurrogate):
        return fourier_of_kernel_mix(surr.points, surr.eta)
    raise TypeError(f"unsupported surrogate type: {type(surr).__name__}")


def h_inner_product(a: FourierForm, b: FourierForm) -> float:
    """<a, b>_H = integral over [-pi, pi]^m = (2 pi)^m sum_w c_w(a) conj(c_w(b))."""
    if a.m != b.m:
        raise ValueError("dimension mismatch")
    val = (2.0 * np.pi) ** a.m * np.sum(a.coeffs * np.conj(b.coeffs))
    return float(val.real)


def kernel_section_gram(p, spacing: float = SHIFT_STEP) -> np.ndarray:
    """H-Gram of the scaled sections sqrt((2pi/3)^m) K(p+q, .) on the full grid.

    At the canonical spacing 2pi/3 this is the identity matrix (the
    sections form an orthonormal basis); other spacings break it, which
    the selftest uses as a negative control.
    """
    p = np.asarray(p, dtype=np.float64)
    m = p.shape[0]
    grid = enumerate_shifts(m, m, spacing=spacing) + p[None, :]
    d = grid.shape[0]
    forms = [fourier_of_kernel_mix(grid[i:i + 1], np.ones(1)) for i in range(d)]
    scale = (3.0 / (2.0 * np.pi)) ** m
    gram = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            gram[i, j] = gram[j, i] = scale * h_inner_product(forms[i], forms[j])
    return gram
