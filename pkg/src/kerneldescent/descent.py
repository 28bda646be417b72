"""Descent loops over counted objectives, plus trace bookkeeping.

Three optimizers share the trace format: plain gradient descent on f,
kernel descent (rebuild a surrogate each outer iteration, then descend
the surrogate classically), and analytic descent (same loop with the
QAD surrogate). Inner minimization never touches the circuit except
where a policy explicitly checks true values; those checks are counted
like any other evaluation.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .baselines import build_qad_surrogate, parameter_shift_gradient
from .surrogate import build_surrogate

DEFAULT_EPSILON = 1e-12


@dataclass(frozen=True)
class FixedStepsPolicy:
    """k surrogate-gradient steps of fixed length (alpha/k)*||grad f(theta_t)||.

    Step directions are normalized, so the inner polyline has total
    length alpha*||grad f(theta_t)|| regardless of the surrogate's
    local gradient magnitudes.
    """

    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class StopOnTrueIncreasePolicy:
    """Plain surrogate descent with periodic true-value checkpoints.

    Runs at most ``cap`` steps of rate ``inner_lr``, evaluating the true
    objective every ``check_every`` steps; stops at the first checkpoint
    whose true value exceeds the previous one and returns the best
    (point, true value) seen, the start included. Costs at most
    cap/check_every - 1 extra evaluations per outer iteration.
    """

    inner_lr: float
    check_every: int = 1000
    cap: int = 10000

    def __post_init__(self):
        if self.inner_lr <= 0:
            raise ValueError("inner_lr must be positive")
        if not 1 <= self.check_every <= self.cap:
            raise ValueError("need 1 <= check_every <= cap")
        if self.cap % self.check_every != 0:
            raise ValueError("check_every must divide cap")


@dataclass
class DescentTrace:
    algorithm: str
    iterates: np.ndarray            # (T+1, m)
    values: np.ndarray              # (T+1,)
    evals_per_iteration: np.ndarray  # (T,) exact per-outer-iteration costs
    initial_evals: int              # spent before the first iteration
    closing_evals: int              # spent after the last iteration
    order: int | None = None        # surrogate order for kernel descent
    alpha: float | None = None

    @property
    def total_evals(self) -> int:
        return self.initial_evals + int(self.evals_per_iteration.sum()) + self.closing_evals

    @property
    def iterations(self) -> int:
        return self.evals_per_iteration.shape[0]


def _validate_start(inst, theta0, iterations):
    theta0 = np.ascontiguousarray(theta0, dtype=np.float64)
    if theta0.shape != (inst.m,):
        raise ValueError(f"theta0 must have shape ({inst.m},)")
    if iterations < 1:
        raise ValueError("need at least one iteration")
    return theta0


def gradient_descent(inst, theta0, alpha: float, iterations: int) -> DescentTrace:
    """theta <- theta - alpha * grad f(theta), 2m+1 evaluations per step."""
    theta0 = _validate_start(inst, theta0, iterations)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    m = inst.m
    iterates = np.empty((iterations + 1, m))
    values = np.empty(iterations + 1)
    per_iter = np.empty(iterations, dtype=np.int64)
    iterates[0] = theta0
    values[0] = inst.evaluate(theta0)
    x = theta0.copy()
    for t in range(iterations):
        before = inst.eval_counter
        x = x - alpha * parameter_shift_gradient(inst, x)
        iterates[t + 1] = x
        values[t + 1] = inst.evaluate(x)
        per_iter[t] = inst.eval_counter - before
    return DescentTrace("gd", iterates, values, per_iter,
                        initial_evals=1, closing_evals=0, alpha=alpha)


def inner_fixed_k(surr, theta_t, k: int, alpha: float, epsilon: float = DEFAULT_EPSILON):
    """Fixed-step-length surrogate descent; returns (endpoint, path length).

    The step length is calibrated to the surrogate gradient at theta_t,
    which by the contact property equals grad f(theta_t), so no circuit
    evaluations happen here.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    theta_t = np.ascontiguousarray(theta_t, dtype=np.float64)
    target = float(np.linalg.norm(surr.gradient(theta_t)))
    step_len = alpha * target / k
    if hasattr(surr, "_inner_fixed"):
        x, path = surr._inner_fixed(theta_t, step_len, epsilon, k)
        return x, float(path)
    x = theta_t.copy()
    path = 0.0
    for _ in range(k):
        g = surr.gradient(x)
        delta = (step_len / (np.linalg.norm(g) + epsilon)) * g
        x = x - delta
        path += float(np.linalg.norm(delta))
    return x, path


def _surrogate_steps(surr, x, lr, nsteps):
    if hasattr(surr, "_inner_plain"):
        return surr._inner_plain(x, lr, nsteps)
    x = x.copy()
    for _ in range(nsteps):
        x = x - lr * surr.gradient(x)
    return x


def inner_stop_on_true_increase(surr, inst, theta_t, f_theta_t: float,
                                policy: StopOnTrueIncreasePolicy):
    """Descend the surrogate until the true objective stops improving.

    Returns (point, true value); both always come from an actual
    evaluation (or the supplied start value), never from the surrogate.
    """
    theta_t = np.ascontiguousarray(theta_t, dtype=np.float64)
    x = theta_t
    best_x, best_f = theta_t, float(f_theta_t)
    prev = float(f_theta_t)
    for _ in range(policy.cap // policy.check_every - 1):
        x = _surrogate_steps(surr, x, policy.inner_lr, policy.check_every)
        fx = inst.evaluate(x)
        if fx < best_f:
            best_x, best_f = x, fx
        if fx > prev:
            break
        prev = fx
    return best_x, best_f


def _surrogate_descent(inst, theta0, iterations, build, inner, alpha, epsilon,
                       algorithm, order):
    theta0 = _validate_start(inst, theta0, iterations)
    m = inst.m
    iterates = np.empty((iterations + 1, m))
    values = np.empty(iterations + 1)
    per_iter = np.empty(iterations, dtype=np.int64)
    iterates[0] = theta0
    x = theta0.copy()
    last_true = None
    for t in range(iterations):
        before = inst.eval_counter
        surr = build(x)
        values[t] = surr.values[0] if hasattr(surr, "values") else surr.e0
        if isinstance(inner, FixedStepsPolicy):
            x, _ = inner_fixed_k(surr, x, inner.k, alpha, epsilon)
            last_true = None
        else:
            x, last_true = inner_stop_on_true_increase(surr, inst, x, values[t], inner)
        iterates[t + 1] = x
        per_iter[t] = inst.eval_counter - before
    if last_true is None:
        values[iterations] = inst.evaluate(x)
        closing = 1
    else:
        # every stop-policy candidate already carries its true value
        values[iterations] = last_true
        closing = 0
    return DescentTrace(algorithm, iterates, values, per_iter,
                        initial_evals=0, closing_evals=closing,
                        order=order, alpha=alpha)


def kernel_descent(inst, theta0, order: int, iterations: int, inner,
                   alpha: float | None = None,
                   epsilon: float = DEFAULT_EPSILON) -> DescentTrace:
    """Outer loop: build an order-L surrogate at theta_t, descend it.

    ``inner`` is a FixedStepsPolicy (requires ``alpha``) or a
    StopOnTrueIncreasePolicy. Each outer iteration costs exactly the
    D = sum_k 2^k C(m,k) build evaluations plus any checkpoint ones.
    """
    if isinstance(inner, FixedStepsPolicy):
        if alpha is None or alpha <= 0:
            raise ValueError("fixed-step inner policy needs alpha > 0")
    elif not isinstance(inner, StopOnTrueIncreasePolicy):
        raise TypeError("inner must be FixedStepsPolicy or StopOnTrueIncreasePolicy")
    return _surrogate_descent(
        inst, theta0, iterations,
        build=lambda x: build_surrogate(inst, x, order),
        inner=inner, alpha=alpha, epsilon=epsilon,
        algorithm="kd", order=order)


def qad_descent(inst, theta0, iterations: int,
                inner: StopOnTrueIncreasePolicy) -> DescentTrace:
    """Analytic descent: QAD surrogate per outer iteration, stop policy inner."""
    if not isinstance(inner, StopOnTrueIncreasePolicy):
        raise TypeError("qad_descent uses the stop-on-true-increase policy")
    return _surrogate_descent(
        inst, theta0, iterations,
        build=lambda x: build_qad_surrogate(inst, x),
        inner=inner, alpha=None, epsilon=DEFAULT_EPSILON,
        algorithm="qad", order=None)


# ---------------------------------------------------------------------------
# trace serialization


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def trace_csv_header(m: int) -> str:
    thetas = ",".join(f"theta_{i}" for i in range(m))
    return f"run_id,algorithm,L,alpha,iteration,{thetas},f_value,evals_cumulative"


def trace_csv_rows(run_id, trace: DescentTrace):
    """One row per iterate; evals_cumulative counts through iteration t.

    Row 0 carries the evaluations spent before the first iteration (1
    for gradient descent, 0 for surrogate methods whose start value
    comes from the first build); the last row equals total_evals.
    """
    rows = []
    t_count = trace.iterations
    cum = trace.initial_evals
    order = "" if trace.order is None else str(trace.order)
    alpha = "" if trace.alpha is None else _fmt(trace.alpha)
    for t in range(t_count + 1):
        if t > 0:
            cum += int(trace.evals_per_iteration[t - 1])
        if t == t_count:
            cum += trace.closing_evals
        thetas = ",".join(_fmt(v) for v in trace.iterates[t])
        rows.append(f"{run_id},{trace.algorithm},{order},{alpha},{t},"
                    f"{thetas},{_fmt(trace.values[t])},{cum}")
    return rows


def write_traces_csv(fileobj: io.TextIOBase, traces):
    """traces: iterable of (run_id, DescentTrace) sharing one m."""
    traces = list(traces)
    if not traces:
        raise ValueError("no traces to write")
    m = traces[0][1].iterates.shape[1]
    if any(tr.iterates.shape[1] != m for _, tr in traces):
        raise ValueError("all traces in one file must share the parameter count")
    fileobj.write(trace_csv_header(m) + "\n")
    for run_id, tr in traces:
        for row in trace_csv_rows(run_id, tr):
            fileobj.write(row + "\n")
