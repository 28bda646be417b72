"""Dispatch layer over the two kernel implementations.

Imports the numba-compiled kernels when available (the default) or the
vectorized numpy fallbacks when numba is missing or disabled through
KERNELDESCENT_NUMBA=0. ``BACKEND`` records which one is active.
"""

from . import _accel

if _accel.BACKEND == "numba":
    from . import _kernels_numba as _impl
else:
    from . import _kernels_numpy as _impl

BACKEND = _impl.BACKEND

apply_two_qubit_inplace = _impl.apply_two_qubit_inplace
apply_pauli_inplace = _impl.apply_pauli_inplace
apply_pauli_rotation_inplace = _impl.apply_pauli_rotation_inplace
pauli_bracket = _impl.pauli_bracket
prepare_objective_state = _impl.prepare_objective_state
objective_eval = _impl.objective_eval
kd_value = _impl.kd_value
kd_value_grad = _impl.kd_value_grad
kd_inner_fixed = _impl.kd_inner_fixed
kd_inner_plain = _impl.kd_inner_plain
qad_value = _impl.qad_value
qad_value_grad = _impl.qad_value_grad
qad_inner_plain = _impl.qad_inner_plain
