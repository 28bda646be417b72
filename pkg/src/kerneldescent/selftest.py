"""End-to-end self-checks runnable from the CLI.

Each check re-derives an exact property of the stack with an
independent construction (dense matrices, eigendecompositions, closed
forms) and reports one PASS/FAIL line. One check is a deliberate
negative control: the shift-grid orthonormality must *break* when the
grid spacing is corrupted, proving the detector has teeth.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .baselines import build_qad_surrogate, parameter_shift_gradient
from .circuit import (
    ObjectiveInstance,
    ParamCircuit,
    identity_layer,
    instance_to_json,
    sample_haar_su4,
    sample_instance,
)
from .descent import FixedStepsPolicy, gradient_descent, inner_fixed_k, kernel_descent
from .experiments import fit_power_curve, mean_polar_angle, normalize_family
from .pauli import Observable, PauliString
from .rng import child_rng
from .statevector import apply_pauli, apply_pauli_rotation, apply_two_qubit, \
    expectation, init_zero_state
from .surrogate import (
    build_surrogate,
    build_surrogate_general,
    kernel_section_gram,
    shift_count,
)

SEED = 20240814


def _cosine_instance():
    layers = [identity_layer(1), identity_layer(1)]
    circ = ParamCircuit(1, 1, layers, [PauliString("X")])
    return ObjectiveInstance(circ, Observable([(1.0, PauliString("Z"))]))


def check_statevector_norm():
    rng = child_rng(SEED, "selftest-sv")
    st = init_zero_state(5)
    for _ in range(40):
        qa, qb = rng.choice(5, size=2, replace=False)
        apply_two_qubit(st, sample_haar_su4(rng), (int(qa), int(qb)))
    drift = abs(st.norm() - 1.0)
    return drift < 1e-10, f"norm drift {drift:.2e} after 40 random gates"


def check_pauli_dense():
    rng = child_rng(SEED, "selftest-pauli")
    worst = 0.0
    for letters in ("XYZ", "YIY", "ZZX"):
        p = PauliString(letters)
        amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        amps /= np.linalg.norm(amps)
        st = init_zero_state(3)
        st.amplitudes[:] = amps
        apply_pauli(st, p)
        worst = max(worst, float(np.abs(st.amplitudes - p.dense() @ amps).max()))
    return worst < 1e-12, f"mask kernels vs kron matrices, max dev {worst:.2e}"


def check_rotation_dense():
    rng = child_rng(SEED, "selftest-rot")
    p = PauliString("XZY")
    angle = 0.83
    dense = p.dense()
    evals, evecs = np.linalg.eigh(dense)
    u = evecs @ np.diag(np.exp(-0.5j * angle * evals)) @ evecs.conj().T
    amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    amps /= np.linalg.norm(amps)
    st = init_zero_state(3)
    st.amplitudes[:] = amps
    apply_pauli_rotation(st, p, angle)
    dev = float(np.abs(st.amplitudes - u @ amps).max())
    return dev < 1e-12, f"rotation vs eigenbasis exponential, max dev {dev:.2e}"


def check_objective_closed_form():
    inst = _cosine_instance()
    worst = max(abs(inst.evaluate(np.array([t])) - np.cos(t))
                for t in (0.0, 0.4, 1.2, -2.0, 3.0))
    return worst < 1e-12, f"f(theta)=cos(theta) instance, max dev {worst:.2e}"


def check_fused_vs_composable():
    rng = child_rng(SEED, "selftest-fused")
    inst, theta0 = sample_instance(rng, 4, 3)
    st = init_zero_state(4)
    for i, layer in enumerate(inst.circuit.layers):
        for b, block in enumerate(layer.blocks):
            pair = (int(layer.permutation[2 * b]), int(layer.permutation[2 * b + 1]))
            apply_two_qubit(st, block, pair)
        if i < inst.m:
            apply_pauli_rotation(st, inst.circuit.generators[i], theta0[i])
    composed = expectation(st, inst.observable)
    fused = inst.evaluate(theta0)
    dev = abs(composed - fused)
    return dev < 1e-12, f"fused evaluation vs composable ops, dev {dev:.2e}"


def check_haar_moment():
    rng = child_rng(SEED, "selftest-haar")
    count = 20000
    vals = np.empty(count)
    worst_unitary = 0.0
    for i in range(count):
        u = sample_haar_su4(rng)
        vals[i] = abs(u[0, 0]) ** 2
        if i < 200:
            worst_unitary = max(worst_unitary, float(np.linalg.norm(
                u.conj().T @ u - np.eye(4))))
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(count))
    ok = abs(mean - 0.25) < 5 * se and worst_unitary < 1e-12
    return ok, (f"E|u00|^2 = {mean:.5f} (target 0.25, 5se = {5 * se:.5f}), "
                f"unitarity dev {worst_unitary:.1e}")


def check_sampling_determinism():
    a = instance_to_json(*sample_instance(child_rng(SEED, "selftest-det"), 3, 2))
    b = instance_to_json(*sample_instance(child_rng(SEED, "selftest-det"), 3, 2))
    return a == b, "same stream twice gives identical serialized instances"


def check_eval_counts():
    rng = child_rng(SEED, "selftest-counts")
    m = 4
    inst, theta0 = sample_instance(rng, 4, m)
    c0 = inst.eval_counter
    parameter_shift_gradient(inst, theta0)
    d_grad = inst.eval_counter - c0
    c0 = inst.eval_counter
    build_surrogate(inst, theta0, 1)
    d_b1 = inst.eval_counter - c0
    c0 = inst.eval_counter
    build_surrogate(inst, theta0, 2)
    d_b2 = inst.eval_counter - c0
    c0 = inst.eval_counter
    build_qad_surrogate(inst, theta0)
    d_qad = inst.eval_counter - c0
    tr = gradient_descent(inst, theta0, 0.1, 2)
    ok = (d_grad == 2 * m and d_b1 == 2 * m + 1 and d_b2 == 2 * m * m + 1
          and d_qad == 2 * m * m + m + 1
          and all(v == 2 * m + 1 for v in tr.evals_per_iteration))
    return ok, (f"grad {d_grad}=2m, builds {d_b1}/{d_b2}, qad {d_qad}, "
                f"gd iteration {tr.evals_per_iteration[0]}")


def check_interpolation():
    rng = child_rng(SEED, "selftest-interp")
    inst, p = sample_instance(rng, 4, 3)
    surr = build_surrogate(inst, p, 2)
    worst = max(abs(surr.value(p + q) - v) for q, v in zip(surr.shifts, surr.values))
    return worst < 1e-10, f"surrogate reproduces node values, max dev {worst:.2e}"


def check_axis_exactness():
    rng = child_rng(SEED, "selftest-axis")
    inst, p = sample_instance(rng, 4, 4)
    surr = build_surrogate(inst, p, 1)
    qad = build_qad_surrogate(inst, p)
    worst_s = worst_q = 0.0
    for k in range(4):
        for t in (-2.4, 0.9, 3.0):
            x = p.copy()
            x[k] += t
            fx = inst.evaluate(x)
            worst_s = max(worst_s, abs(surr.value(x) - fx))
            worst_q = max(worst_q, abs(qad.value(x) - fx))
    ok = worst_s < 1e-9 and worst_q < 1e-9
    return ok, f"single-axis errors: surrogate {worst_s:.2e}, qad {worst_q:.2e}"


def check_gradient_contact():
    rng = child_rng(SEED, "selftest-contact")
    inst, p = sample_instance(rng, 4, 4)
    g_true = parameter_shift_gradient(inst, p)
    g_surr = build_surrogate(inst, p, 1).gradient(p)
    g_qad = build_qad_surrogate(inst, p).gradient(p)
    dev = max(float(np.abs(g_surr - g_true).max()), float(np.abs(g_qad - g_true).max()))
    return dev < 1e-8, f"surrogate/qad gradients vs parameter shift at p, dev {dev:.2e}"


def check_full_reconstruction():
    rng = child_rng(SEED, "selftest-recon")
    inst, p = sample_instance(rng, 3, 3)
    surr = build_surrogate(inst, p, 3)
    worst = 0.0
    for _ in range(50):
        x = rng.uniform(-np.pi, np.pi, 3)
        worst = max(worst, abs(surr.value(x) - inst.evaluate(x)))
    return worst < 1e-9, f"order m surrogate equals f everywhere, max dev {worst:.2e}"


def check_gram_path():
    rng = child_rng(SEED, "selftest-gram")
    inst, p = sample_instance(rng, 3, 3)
    surr = build_surrogate(inst, p, 2)
    gen = build_surrogate_general(surr.anchors, surr.values)
    worst = 0.0
    for _ in range(25):
        x = rng.uniform(-np.pi, np.pi, 3)
        worst = max(worst, abs(surr.value(x) - gen.value(x)))
    return worst < 1e-8, f"orthonormal shortcut vs Gram solve, max dev {worst:.2e}"


def check_orthonormal_sections():
    rng = child_rng(SEED, "selftest-ortho")
    p = rng.uniform(-np.pi, np.pi, 2)
    gram = kernel_section_gram(p)
    dev = float(np.abs(gram - np.eye(gram.shape[0])).max())
    return dev < 1e-10, f"scaled kernel sections H-orthonormal, dev {dev:.2e}"


def check_orthonormal_negative_control():
    rng = child_rng(SEED, "selftest-ortho-neg")
    p = rng.uniform(-np.pi, np.pi, 2)
    gram = kernel_section_gram(p, spacing=0.5 * np.pi)
    dev = float(np.abs(gram - np.eye(gram.shape[0])).max())
    # the corrupted spacing MUST break orthonormality
    return dev > 1e-3, f"pi/2-spaced grid breaks orthonormality as it should, dev {dev:.2e}"


def check_polyline_length():
    rng = child_rng(SEED, "selftest-poly")
    inst, p = sample_instance(rng, 4, 4)
    surr = build_surrogate(inst, p, 1)
    alpha = 1.5
    target = float(np.linalg.norm(surr.gradient(p)))
    _, path = inner_fixed_k(surr, p, k=50, alpha=alpha)
    dev = abs(path - alpha * target)
    return dev < 1e-9, f"fixed-k inner path length vs alpha*|grad f|, dev {dev:.2e}"


def check_first_step_matches_gd():
    rng = child_rng(SEED, "selftest-first")
    inst, theta0 = sample_instance(rng, 4, 4)
    tr_gd = gradient_descent(inst, theta0, 0.7, 1)
    tr_kd = kernel_descent(inst, theta0, 1, 1, FixedStepsPolicy(1), alpha=0.7)
    dev = float(np.abs(tr_gd.iterates[1] - tr_kd.iterates[1]).max())
    return dev < 1e-9, f"k=1 kernel step equals gradient step, dev {dev:.2e}"


def check_normalization():
    out = normalize_family([np.array([3.0, 1.0]), np.array([3.0, 5.0])])
    ok = (out is not None
          and np.allclose(out[0], [1.0, 0.0]) and np.allclose(out[1], [1.0, 2.0])
          and normalize_family([np.array([2.0, 2.0])]) is None)
    return ok, "affine rescaling plus pathological flag on flat families"


def check_fit_and_angle():
    c = fit_power_curve([2.0], [8.0], 3)
    ang = mean_polar_angle([1.0], [1.0])
    ok = abs(c - 1.0) < 1e-12 and abs(ang - np.pi / 4) < 1e-12
    return ok, f"c={c:g} for (2,8) cubic fit, angle(1,1)={ang:.4f}"


CHECKS = [
    ("statevector norm preservation", check_statevector_norm),
    ("pauli application vs dense matrices", check_pauli_dense),
    ("rotation vs matrix exponential", check_rotation_dense),
    ("closed-form cosine objective", check_objective_closed_form),
    ("fused vs composable evaluation", check_fused_vs_composable),
    ("haar SU(4) moment and unitarity", check_haar_moment),
    ("sampling determinism", check_sampling_determinism),
    ("evaluation accounting", check_eval_counts),
    ("surrogate node interpolation", check_interpolation),
    ("single-axis exactness", check_axis_exactness),
    ("gradient contact at base point", check_gradient_contact),
    ("order-m full reconstruction", check_full_reconstruction),
    ("gram solve equals orthonormal weights", check_gram_path),
    ("shift-grid section orthonormality", check_orthonormal_sections),
    ("orthonormality negative control", check_orthonormal_negative_control),
    ("fixed-k polyline length", check_polyline_length),
    ("k=1 step matches gradient descent", check_first_step_matches_gd),
    ("family normalization", check_normalization),
    ("power fit and polar angle", check_fit_and_angle),
]


def run_selftest(printer=print) -> int:
    """Run all checks; returns the number of failures."""
    failures = 0
    printer(f"kernel backend: {kernels.BACKEND}")
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        if not ok:
            failures += 1
        printer(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    printer(f"{len(CHECKS) - failures}/{len(CHECKS)} checks passed")
    return failures
