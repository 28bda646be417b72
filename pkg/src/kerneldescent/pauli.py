"""Pauli strings and Hermitian observables built from them.

Qubit k corresponds to bit k of the basis index (little-endian), and to
position k of the letter string. A string acts on a basis state as

    P|i> = i**(#Y) * (-1)**popcount(i & (Z|Y masks)) * |i XOR (X|Y masks)>

which is how the kernels consume it: ``flip_mask`` toggles bits,
``zy_mask`` feeds the parity sign, ``phase`` collects i**(#Y).
"""

from __future__ import annotations

import numpy as np

PAULI_LETTERS = "IXYZ"

_MATS = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}

_DENSE_MAX_QUBITS = 12


class PauliString:
    """Tensor product of single-qubit Paulis, e.g. ``PauliString("XIZ")``."""

    __slots__ = ("letters", "flip_mask", "zy_mask", "phase")

    def __init__(self, letters: str):
        if not letters:
            raise ValueError("empty Pauli string")
        bad = set(letters) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters: {sorted(bad)}")
        flip = 0
        zy = 0
        n_y = 0
        for k, ch in enumerate(letters):
            if ch in "XY":
                flip |= 1 << k
            if ch in "ZY":
                zy |= 1 << k
            if ch == "Y":
                n_y += 1
        self.letters = letters
        self.flip_mask = flip
        self.zy_mask = zy
        self.phase = 1j ** n_y

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    def dense(self) -> np.ndarray:
        """Full 2^n x 2^n matrix; qubit 0 is the least significant bit."""
        if self.n > _DENSE_MAX_QUBITS:
            raise ValueError(f"dense form capped at {_DENSE_MAX_QUBITS} qubits")
        out = np.array([[1.0 + 0.0j]])
        for k in range(self.n - 1, -1, -1):
            out = np.kron(out, _MATS[self.letters[k]])
        return out

    def __eq__(self, other):
        return isinstance(other, PauliString) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return f"PauliString({self.letters!r})"


class Observable:
    """Real linear combination of Pauli strings on a fixed qubit count."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        terms = [(float(c), p) for c, p in terms]
        if not terms:
            raise ValueError("observable needs at least one term")
        n = terms[0][1].n
        if any(p.n != n for _, p in terms):
            raise ValueError("all terms must act on the same qubit count")
        self.terms = terms

    @property
    def n(self) -> int:
        return self.terms[0][1].n

    def dense(self) -> np.ndarray:
        out = np.zeros((1 << self.n, 1 << self.n), dtype=np.complex128)
        for c, p in self.terms:
            out += c * p.dense()
        return out

    def __repr__(self):
        inner = ", ".join(f"{c:+g}*{p.letters}" for c, p in self.terms)
        return f"Observable({inner})"


def packed_paulis(paulis):
    """Mask arrays for a list of strings, in kernel-ready dtypes."""
    flips = np.array([p.flip_mask for p in paulis], dtype=np.int64)
    zys = np.array([p.zy_mask for p in paulis], dtype=np.int64)
    phases = np.array([p.phase for p in paulis], dtype=np.complex128)
    return flips, zys, phases
