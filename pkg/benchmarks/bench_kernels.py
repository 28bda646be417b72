"""Benchmark the compiled kernels against the pure-numpy fallbacks.

Imports both implementation modules directly (bypassing the env-flag
dispatch) and times matched workloads. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--repeats 5]

The first numba call per function includes JIT compilation; a warmup
pass keeps that out of the timings.
"""

import argparse
import timeit

import numpy as np

from kerneldescent import _kernels_numpy as knp
from kerneldescent.circuit import sample_instance
from kerneldescent.pauli import PauliString
from kerneldescent.rng import child_rng
from kerneldescent.surrogate import build_surrogate

try:
    from kerneldescent import _kernels_numba as knb
except ImportError:
    knb = None


def _state(rng, n):
    amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return np.ascontiguousarray(amps / np.linalg.norm(amps))


def _haar4(rng):
    z = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return np.ascontiguousarray(q * (np.diagonal(r) / np.abs(np.diagonal(r))).conj())


def build_workloads():
    rng = child_rng(0, "bench")
    n = 10
    amps = _state(rng, n)
    u = _haar4(rng)
    pauli = PauliString("XZYIXZYIXZ")

    inst, theta0 = sample_instance(rng, n, 10, "gaussian-sum-20")
    obj_args = (inst.n, inst._perms, inst._blocks, inst._gen_flip,
                inst._gen_zy, inst._gen_phase, theta0, inst._obs_flip,
                inst._obs_zy, inst._obs_phase, inst._obs_coeff)

    small, p = sample_instance(rng, 4, 10)
    surr = build_surrogate(small, p, 2)           # D = 201 anchors, m = 10
    probe = p + rng.uniform(-1, 1, size=10)

    e0 = float(rng.standard_normal())
    g = rng.standard_normal(10)
    h = rng.standard_normal(10)
    c = rng.standard_normal((10, 10))
    cross = np.triu(c, 1) + np.triu(c, 1).T

    return [
        ("two-qubit gate (n=10)", 200,
         lambda k: k.apply_two_qubit_inplace(amps, u, 3, 7)),
        ("pauli rotation (n=10)", 200,
         lambda k: k.apply_pauli_rotation_inplace(
             amps, pauli.flip_mask, pauli.zy_mask, pauli.phase, 0.8, 0.6)),
        ("pauli bracket (n=10)", 200,
         lambda k: k.pauli_bracket(amps, pauli.flip_mask, pauli.zy_mask, pauli.phase)),
        ("objective eval (n=10, m=10, 20 terms)", 20,
         lambda k: k.objective_eval(*obj_args)),
        ("surrogate value+grad (m=10, L=2)", 100,
         lambda k: k.kd_value_grad(probe, surr.anchors, surr.values)),
        ("surrogate inner loop (1000 steps)", 5,
         lambda k: k.kd_inner_plain(probe, surr.anchors, surr.values, 0.01, 1000)),
        ("qad value+grad (m=10)", 200,
         lambda k: k.qad_value_grad(probe, p, e0, g, h, cross)),
        ("qad inner loop (1000 steps)", 5,
         lambda k: k.qad_inner_plain(probe, p, e0, g, h, cross, 0.01, 1000)),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per workload (best is reported)")
    args = parser.parse_args()

    workloads = build_workloads()
    backends = [("numpy", knp)]
    if knb is not None:
        backends.insert(0, ("numba", knb))
        for _, _, fn in workloads:
            fn(knb)    # JIT warmup
    else:
        print("numba not importable; timing the numpy fallback only\n")

    name_w = max(len(name) for name, _, _ in workloads)
    header = f"{'workload':<{name_w}}  " + "".join(f"{nm + ' (us)':>14}" for nm, _ in backends)
    if knb is not None:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    for name, inner, fn in workloads:
        per_call = {}
        for nm, mod in backends:
            best = min(timeit.repeat(lambda: fn(mod), number=inner,
                                     repeat=args.repeats))
            per_call[nm] = best / inner * 1e6
        row = f"{name:<{name_w}}  " + "".join(f"{per_call[nm]:>14.1f}" for nm, _ in backends)
        if knb is not None:
            row += f"{per_call['numpy'] / per_call['numba']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
