"""Parametrized circuits: fixed entangling layers with Pauli rotations.

A circuit alternates m+1 fixed quantum-volume style layers with m
single-parameter Pauli-string rotations:

    |psi(theta)> = C_{m+1} R_m(theta_m) C_m ... R_1(theta_1) C_1 |0>^n

Each layer is a uniformly random permutation of the qubits followed by
independent Haar-random SU(4) blocks on consecutive pairs (the last
qubit idles when n is odd). The objective f(theta) = <psi|M|psi> is
evaluated exactly; every evaluation bumps ``eval_counter`` by one, which
is what all query-cost accounting rests on.
"""

from __future__ import annotations

import json

import numpy as np

from . import kernels
from .pauli import Observable, PauliString, packed_paulis, PAULI_LETTERS
from .statevector import ResourceLimitError, SimulationError, DEFAULT_MAX_QUBITS

_BLOCK_UNITARY_TOL = 1e-10
_IMAG_TOL = 1e-10
_NORM_TOL = 1e-8

_FORMAT_TAG = "kerneldescent-instance-v1"


class QvLayer:
    """One fixed layer: qubit permutation + SU(4) blocks on pairs."""

    __slots__ = ("n", "permutation", "blocks")

    def __init__(self, permutation, blocks):
        permutation = np.asarray(permutation, dtype=np.int64)
        n = permutation.shape[0]
        if sorted(permutation.tolist()) != list(range(n)):
            raise ValueError("permutation must be a bijection of 0..n-1")
        blocks = np.ascontiguousarray(blocks, dtype=np.complex128).reshape(-1, 4, 4)
        if blocks.shape[0] != n // 2:
            raise ValueError(f"expected {n // 2} blocks for n={n}, got {blocks.shape[0]}")
        eye = np.eye(4)
        for b in blocks:
            dev = np.linalg.norm(b.conj().T @ b - eye)
            if dev > _BLOCK_UNITARY_TOL:
                raise ValueError(f"block is not unitary (deviation {dev:.3e})")
        self.n = n
        self.permutation = permutation
        self.blocks = blocks


def identity_layer(n: int) -> QvLayer:
    blocks = np.broadcast_to(np.eye(4, dtype=np.complex128), (n // 2, 4, 4)).copy()
    return QvLayer(np.arange(n), blocks)


class ParamCircuit:
    """m+1 fixed layers interleaved with m Pauli-rotation parameters."""

    __slots__ = ("n", "m", "layers", "generators")

    def __init__(self, n, m, layers, generators):
        if n < 1 or m < 1:
            raise ValueError("need n >= 1 and m >= 1")
        if len(layers) != m + 1:
            raise ValueError(f"need m+1={m + 1} layers, got {len(layers)}")
        if len(generators) != m:
            raise ValueError(f"need m={m} generators, got {len(generators)}")
        for lay in layers:
            if lay.n != n:
                raise ValueError("layer qubit count mismatch")
        for g in generators:
            if g.n != n:
                raise ValueError("generator qubit count mismatch")
            if g.is_identity:
                raise ValueError("identity generator makes the parameter inert")
        self.n = n
        self.m = m
        self.layers = list(layers)
        self.generators = list(generators)


class ObjectiveInstance:
    """A circuit plus observable, with evaluation counting.

    ``evaluate`` is the only way the optimizers may touch the quantum
    model; the counter is the ground truth for query costs.
    """

    def __init__(self, circuit: ParamCircuit, observable: Observable,
                 max_qubits: int = DEFAULT_MAX_QUBITS):
        if observable.n != circuit.n:
            raise ValueError("observable qubit count mismatch")
        if circuit.n > max_qubits:
            raise ResourceLimitError(f"n={circuit.n} exceeds the cap of {max_qubits} qubits")
        self.circuit = circuit
        self.observable = observable
        self.eval_counter = 0
        self._perms = np.ascontiguousarray(
            np.stack([lay.permutation for lay in circuit.layers]))
        self._blocks = np.ascontiguousarray(
            np.stack([lay.blocks for lay in circuit.layers]))
        self._gen_flip, self._gen_zy, self._gen_phase = packed_paulis(circuit.generators)
        self._obs_flip, self._obs_zy, self._obs_phase = packed_paulis(
            [p for _, p in observable.terms])
        self._obs_coeff = np.array([c for c, _ in observable.terms], dtype=np.float64)

    @property
    def n(self) -> int:
        return self.circuit.n

    @property
    def m(self) -> int:
        return self.circuit.m

    def evaluate(self, theta) -> float:
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (self.m,):
            raise ValueError(f"theta must have shape ({self.m},), got {theta.shape}")
        value, max_im, norm_sq = kernels.objective_eval(
            self.n, self._perms, self._blocks,
            self._gen_flip, self._gen_zy, self._gen_phase, theta,
            self._obs_flip, self._obs_zy, self._obs_phase, self._obs_coeff,
        )
        if max_im > _IMAG_TOL:
            raise SimulationError(f"non-real observable bracket: imag={max_im:.3e}")
        if abs(np.sqrt(norm_sq) - 1.0) > _NORM_TOL:
            raise SimulationError("state norm drifted beyond tolerance")
        self.eval_counter += 1
        return float(value)


# ---------------------------------------------------------------------------
# sampling


def sample_haar_su4(rng: np.random.Generator) -> np.ndarray:
    """Haar-random SU(4) via QR of a complex Ginibre matrix.

    Dividing each Q column by the phase of the matching R diagonal entry
    gives Haar measure on U(4); a final global phase fixes det = 1.
    """
    re = rng.standard_normal((4, 4))
    im = rng.standard_normal((4, 4))
    z = (re + 1j * im) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    q = q / (d / np.abs(d))
    q = q * np.exp(-1j * np.angle(np.linalg.det(q)) / 4.0)
    return q


def sample_qv_layer(rng: np.random.Generator, n: int) -> QvLayer:
    if n < 2:
        raise ValueError("quantum-volume layers need n >= 2")
    perm = rng.permutation(n)
    blocks = np.stack([sample_haar_su4(rng) for _ in range(n // 2)])
    return QvLayer(perm, blocks)


def sample_pauli_string(rng: np.random.Generator, n: int,
                        exclude_identity: bool = True) -> PauliString:
    """Uniform Pauli string; the all-identity draw is rejected if excluded."""
    while True:
        letters = "".join(PAULI_LETTERS[i] for i in rng.integers(0, 4, size=n))
        if exclude_identity and set(letters) == {"I"}:
            continue
        return PauliString(letters)


def sample_observable(rng: np.random.Generator, n: int, kind: str) -> Observable:
    if kind == "single-pauli":
        return Observable([(1.0, sample_pauli_string(rng, n, exclude_identity=True))])
    if kind == "gaussian-sum-20":
        # 20 uniform strings, identity allowed, then 20 N(0,1) weights.
        paulis = [sample_pauli_string(rng, n, exclude_identity=False) for _ in range(20)]
        coeffs = rng.standard_normal(20)
        return Observable(list(zip(coeffs, paulis)))
    raise ValueError(f"unknown observable kind: {kind!r}")


def sample_instance(rng: np.random.Generator, n: int, m: int,
                    observable_kind: str = "single-pauli"):
    """Fresh (instance, theta_0) pair.

    Draw order is fixed (layers, generators, observable, theta_0) so a
    given stream always produces the same instance.
    """
    if n < 2:
        raise ValueError("sampled instances need n >= 2")
    layers = [sample_qv_layer(rng, n) for _ in range(m + 1)]
    generators = [sample_pauli_string(rng, n, exclude_identity=True) for _ in range(m)]
    observable = sample_observable(rng, n, observable_kind)
    theta0 = rng.uniform(-np.pi, np.pi, size=m)
    circuit = ParamCircuit(n, m, layers, generators)
    return ObjectiveInstance(circuit, observable), theta0


# ---------------------------------------------------------------------------
# serialization


def _complex_mat_to_lists(mat: np.ndarray):
    return [[[float(v.real), float(v.imag)] for v in row] for row in mat]


def _complex_mat_from_lists(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data],
                    dtype=np.complex128)


def instance_to_json(inst: ObjectiveInstance, theta0) -> str:
    """Self-contained JSON for (circuit, observable, theta_0).

    Floats are serialized by repr, so the round trip is bitwise exact.
    """
    doc = {
        "format": _FORMAT_TAG,
        "n": inst.n,
        "m": inst.m,
        "layers": [
            {
                "permutation": lay.permutation.tolist(),
                "blocks": [_complex_mat_to_lists(b) for b in lay.blocks],
            }
            for lay in inst.circuit.layers
        ],
        "generators": [g.letters for g in inst.circuit.generators],
        "observable": [[c, p.letters] for c, p in inst.observable.terms],
        "theta0": [float(v) for v in np.asarray(theta0, dtype=np.float64)],
    }
    return json.dumps(doc)


def instance_from_json(text: str):
    doc = json.loads(text)
    if doc.get("format") != _FORMAT_TAG:
        raise ValueError(f"unrecognized format tag: {doc.get('format')!r}")
    layers = [
        QvLayer(lay["permutation"],
                np.stack([_complex_mat_from_lists(b) for b in lay["blocks"]])
                if lay["blocks"] else np.zeros((0, 4, 4), dtype=np.complex128))
        for lay in doc["layers"]
    ]
    generators = [PauliString(s) for s in doc["generators"]]
    observable = Observable([(c, PauliString(s)) for c, s in doc["observable"]])
    circuit = ParamCircuit(doc["n"], doc["m"], layers, generators)
    theta0 = np.array(doc["theta0"], dtype=np.float64)
    return ObjectiveInstance(circuit, observable), theta0
