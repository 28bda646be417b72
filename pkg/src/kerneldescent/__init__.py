"""Kernel descent: RKHS-surrogate optimization of quantum circuit objectives.

An exact statevector simulator provides counted objective evaluations
f(theta) = <psi(theta)|M|psi(theta)> for randomly sampled layered
circuits; the optimizer repeatedly interpolates f on a local shift grid
with a product-cosine reproducing kernel and descends the surrogate
classically. Gradient descent and quantum analytic descent are included
as baselines, together with an experiment harness and CLI running the
comparison studies deterministically.
"""

from ._accel import BACKEND
from .pauli import Observable, PauliString
from .statevector import (
    ResourceLimitError,
    SimulationError,
    Statevector,
    apply_pauli,
    apply_pauli_rotation,
    apply_two_qubit,
    expectation,
    init_zero_state,
)
from .circuit import (
    ObjectiveInstance,
    ParamCircuit,
    QvLayer,
    identity_layer,
    instance_from_json,
    instance_to_json,
    sample_haar_su4,
    sample_instance,
    sample_pauli_string,
    sample_qv_layer,
)
from .surrogate import (
    FourierForm,
    GeneralSurrogate,
    KernelSurrogate,
    ShiftSet,
    build_surrogate,
    build_surrogate_general,
    enumerate_shifts,
    fourier_coefficients,
    h_inner_product,
    kernel_k,
    kernel_ktilde,
    shift_count,
    shift_set,
)
from .baselines import QadSurrogate, build_qad_surrogate, parameter_shift_gradient
from .descent import (
    DescentTrace,
    FixedStepsPolicy,
    StopOnTrueIncreasePolicy,
    gradient_descent,
    inner_fixed_k,
    inner_stop_on_true_increase,
    kernel_descent,
    qad_descent,
)
from .rng import child_rng, child_seed_sequence

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
