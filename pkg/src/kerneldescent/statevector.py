"""Exact dense statevector simulation.

States hold 2^n complex128 amplitudes indexed little-endian: basis index
i encodes qubit k in bit k. Gates mutate the amplitude buffer in place
and return the state for chaining. The qubit cap exists because memory
doubles per qubit; it can be raised explicitly by callers who know their
budget.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .pauli import Observable, PauliString

DEFAULT_MAX_QUBITS = 24

_UNITARY_TOL = 1e-8
_NORM_TOL = 1e-8
_IMAG_TOL = 1e-10


class SimulationError(RuntimeError):
    """Numerical contract violated during simulation."""


class ResourceLimitError(RuntimeError):
    """Requested state exceeds the configured qubit cap."""


class Statevector:
    __slots__ = ("n", "amplitudes")

    def __init__(self, n: int, amplitudes: np.ndarray):
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << n,):
            raise ValueError(f"expected {1 << n} amplitudes for n={n}, got shape {amplitudes.shape}")
        self.n = n
        self.amplitudes = amplitudes

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "Statevector":
        return Statevector(self.n, self.amplitudes.copy())


def init_zero_state(n: int, max_qubits: int = DEFAULT_MAX_QUBITS) -> Statevector:
    """|0...0> on n qubits."""
    if n < 1:
        raise ValueError("need at least one qubit")
    if n > max_qubits:
        raise ResourceLimitError(f"n={n} exceeds the cap of {max_qubits} qubits")
    amps = np.zeros(1 << n, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n, amps)


def _check_unitary(u: np.ndarray):
    if u.shape != (4, 4):
        raise ValueError("two-qubit gate must be 4x4")
    dev = np.linalg.norm(u.conj().T @ u - np.eye(4))
    if dev > _UNITARY_TOL:
        raise ValueError(f"gate is not unitary (Frobenius deviation {dev:.3e})")


def apply_two_qubit(state: Statevector, u: np.ndarray, qubits: tuple[int, int]) -> Statevector:
    """Apply a 4x4 unitary to the ordered pair (qa, qb).

    The gate matrix is indexed by 2*a + b where a is the basis bit of qa
    and b the basis bit of qb.
    """
    qa, qb = qubits
    if qa == qb or not (0 <= qa < state.n) or not (0 <= qb < state.n):
        raise ValueError(f"bad qubit pair {qubits} for n={state.n}")
    u = np.ascontiguousarray(u, dtype=np.complex128)
    _check_unitary(u)
    kernels.apply_two_qubit_inplace(state.amplitudes, u, qa, qb)
    return state


def apply_pauli(state: Statevector, p: PauliString) -> Statevector:
    if p.n != state.n:
        raise ValueError(f"Pauli string on {p.n} qubits applied to n={state.n}")
    kernels.apply_pauli_inplace(state.amplitudes, p.flip_mask, p.zy_mask, p.phase)
    return state


def apply_pauli_rotation(state: Statevector, generator: PauliString, angle: float) -> Statevector:
    """exp(-i*angle/2 * G) for a Pauli-string generator G."""
    if generator.n != state.n:
        raise ValueError(f"generator on {generator.n} qubits applied to n={state.n}")
    half = 0.5 * float(angle)
    kernels.apply_pauli_rotation_inplace(
        state.amplitudes, generator.flip_mask, generator.zy_mask, generator.phase,
        np.cos(half), np.sin(half),
    )
    return state


def expectation(state: Statevector, obs: Observable) -> float:
    """<psi|M|psi> for a Pauli-sum observable, term by term.

    Each bracket of a Hermitian term is real up to roundoff; an
    imaginary residue above 1e-10 indicates a corrupted state or
    observable and raises instead of being silently discarded.
    """
    if obs.n != state.n:
        raise ValueError(f"observable on {obs.n} qubits for state with n={state.n}")
    nrm = state.norm()
    if abs(nrm - 1.0) > _NORM_TOL:
        raise SimulationError(f"state norm {nrm!r} deviates from 1 beyond {_NORM_TOL}")
    total = 0.0
    for coeff, p in obs.terms:
        br = kernels.pauli_bracket(state.amplitudes, p.flip_mask, p.zy_mask, p.phase)
        if abs(br.imag) > _IMAG_TOL:
            raise SimulationError(f"non-real bracket for {p.letters}: imag={br.imag:.3e}")
        total += coeff * br.real
    return total
