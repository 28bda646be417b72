import io

import numpy as np
import pytest

from test_baselines import cos_instance

from kerneldescent.circuit import sample_instance
from kerneldescent.descent import (
    DescentTrace,
    FixedStepsPolicy,
    StopOnTrueIncreasePolicy,
    gradient_descent,
    inner_fixed_k,
    inner_stop_on_true_increase,
    kernel_descent,
    qad_descent,
    trace_csv_header,
    trace_csv_rows,
    write_traces_csv,
)
from kerneldescent.rng import child_rng
from kerneldescent.surrogate import build_surrogate, shift_count


class QuadraticSurrogate:
    """Synthetic surrogate 0.5*||x - c||^2 without fast-path hooks.

    Exercises the generic (duck-typed) inner loops.
    """

    def __init__(self, c):
        self.c = np.asarray(c, dtype=np.float64)

    def value(self, x):
        return 0.5 * float(np.sum((x - self.c) ** 2))

    def gradient(self, x):
        return np.asarray(x, dtype=np.float64) - self.c


class TestGradientDescent:
    def test_cosine_single_step(self):
        # grad f(pi/2) = -sin(pi/2) = -1, so theta_1 = pi/2 + alpha
        inst = cos_instance()
        tr = gradient_descent(inst, np.array([np.pi / 2]), alpha=0.1, iterations=1)
        assert abs(tr.iterates[1, 0] - (np.pi / 2 + 0.1)) < 1e-12
        assert abs(tr.values[1] - np.cos(np.pi / 2 + 0.1)) < 1e-12

    def test_eval_accounting(self):
        rng = child_rng(300, "gd-cost")
        inst, theta0 = sample_instance(rng, 2, 3)
        tr = gradient_descent(inst, theta0, alpha=0.1, iterations=4)
        assert tr.initial_evals == 1
        assert tr.closing_evals == 0
        assert np.all(tr.evals_per_iteration == 2 * 3 + 1)
        assert tr.total_evals == 4 * 7 + 1
        assert tr.total_evals == inst.eval_counter

    def test_values_match_iterates(self):
        rng = child_rng(301, "gd-vals")
        inst, theta0 = sample_instance(rng, 2, 3)
        tr = gradient_descent(inst, theta0, alpha=0.2, iterations=3)
        for t in range(4):
            assert abs(tr.values[t] - inst.evaluate(tr.iterates[t])) < 1e-12

    def test_converges_on_cosine(self):
        inst = cos_instance()
        tr = gradient_descent(inst, np.array([2.0]), alpha=0.5, iterations=40)
        assert abs(tr.iterates[-1, 0] - np.pi) < 1e-6
        assert abs(tr.values[-1] + 1.0) < 1e-10

    def test_validation(self):
        inst = cos_instance()
        with pytest.raises(ValueError):
            gradient_descent(inst, np.array([0.0]), alpha=0.1, iterations=0)
        with pytest.raises(ValueError):
            gradient_descent(inst, np.array([0.0]), alpha=-1.0, iterations=1)
        with pytest.raises(ValueError):
            gradient_descent(inst, np.zeros(2), alpha=0.1, iterations=1)


class TestInnerFixedK:
    def test_polyline_length(self):
        rng = child_rng(310, "poly")
        inst, theta0 = sample_instance(rng, 2, 3)
        surr = build_surrogate(inst, theta0, 2)
        target = np.linalg.norm(surr.gradient(theta0))
        for k in (1, 7, 100):
            _, path = inner_fixed_k(surr, theta0, k=k, alpha=2.5)
            assert abs(path - 2.5 * target) < 1e-9

    def test_k1_matches_gradient_step(self):
        # one normalized step of length alpha*||g|| is exactly a plain
        # gradient step of rate alpha (up to the epsilon guard)
        rng = child_rng(311, "k1")
        inst, theta0 = sample_instance(rng, 2, 3)
        surr = build_surrogate(inst, theta0, 2)
        g = surr.gradient(theta0)
        end, _ = inner_fixed_k(surr, theta0, k=1, alpha=0.3)
        np.testing.assert_allclose(end, theta0 - 0.3 * g, atol=1e-9)

    def test_generic_path_matches_fast_path(self):
        rng = child_rng(312, "generic")
        inst, theta0 = sample_instance(rng, 2, 3)
        surr = build_surrogate(inst, theta0, 2)

        class Stripped:
            # same model, no fast hooks
            def gradient(self, x):
                return surr.gradient(x)

        fast_x, fast_len = inner_fixed_k(surr, theta0, k=25, alpha=1.5)
        slow_x, slow_len = inner_fixed_k(Stripped(), theta0, k=25, alpha=1.5)
        np.testing.assert_allclose(fast_x, slow_x, atol=1e-10)
        assert abs(fast_len - slow_len) < 1e-10

    def test_descends_quadratic(self):
        surr = QuadraticSurrogate([1.0, -2.0])
        x0 = np.array([3.0, 3.0])
        end, _ = inner_fixed_k(surr, x0, k=200, alpha=1.0)
        assert surr.value(end) < surr.value(x0)

    def test_epsilon_validation(self):
        surr = QuadraticSurrogate([0.0])
        with pytest.raises(ValueError):
            inner_fixed_k(surr, np.zeros(1), k=1, alpha=1.0, epsilon=0.0)


class TestStopOnTrueIncrease:
    def test_policy_validation(self):
        with pytest.raises(ValueError):
            StopOnTrueIncreasePolicy(inner_lr=0.0)
        with pytest.raises(ValueError):
            StopOnTrueIncreasePolicy(inner_lr=0.1, check_every=0)
        with pytest.raises(ValueError):
            StopOnTrueIncreasePolicy(inner_lr=0.1, check_every=3, cap=10)
        with pytest.raises(ValueError):
            StopOnTrueIncreasePolicy(inner_lr=0.1, check_every=20, cap=10)

    def test_checkpoint_budget(self):
        # at most cap/check_every - 1 true evaluations per inner run
        rng = child_rng(320, "budget")
        inst, theta0 = sample_instance(rng, 2, 3)
        surr = build_surrogate(inst, theta0, 2)
        f0 = inst.evaluate(theta0)
        policy = StopOnTrueIncreasePolicy(inner_lr=0.01, check_every=100, cap=1000)
        before = inst.eval_counter
        inner_stop_on_true_increase(surr, inst, theta0, f0, policy)
        assert inst.eval_counter - before <= 9

    def test_returns_best_seen(self):
        rng = child_rng(321, "best")
        inst, theta0 = sample_instance(rng, 2, 3)
        surr = build_surrogate(inst, theta0, 2)
        f0 = inst.evaluate(theta0)
        policy = StopOnTrueIncreasePolicy(inner_lr=0.02, check_every=500, cap=10000)
        x, fx = inner_stop_on_true_increase(surr, inst, theta0, f0, policy)
        assert fx <= f0 + 1e-15
        assert abs(inst.evaluate(x) - fx) < 1e-12

    def test_immediate_increase_returns_start(self):
        # surrogate that pushes uphill: every checkpoint is worse, so the
        # best point stays theta_t
        rng = child_rng(322, "uphill")
        inst, theta0 = sample_instance(rng, 2, 2)
        f0 = inst.evaluate(theta0)

        class Uphill:
            def gradient(self, x):
                # constant pull away from theta0
                return np.full(2, -1.0)

        policy = StopOnTrueIncreasePolicy(inner_lr=0.05, check_every=1000, cap=10000)
        x, fx = inner_stop_on_true_increase(Uphill(), inst, theta0, f0, policy)
        if fx == f0:
            np.testing.assert_array_equal(x, theta0)
        else:
            assert fx < f0


class TestKernelDescent:
    def test_eval_accounting_fixed(self):
        rng = child_rng(330, "kd-cost")
        inst, theta0 = sample_instance(rng, 2, 4)
        tr = kernel_descent(inst, theta0, order=2, iterations=3,
                            inner=FixedStepsPolicy(k=10), alpha=1.0)
        d = shift_count(4, 2)
        assert np.all(tr.evals_per_iteration == d)
        assert tr.initial_evals == 0 and tr.closing_evals == 1
        assert tr.total_evals == 3 * d + 1
        assert tr.total_evals == inst.eval_counter

    def test_eval_accounting_stop_policy(self):
        rng = child_rng(331, "kd-stop-cost")
        inst, theta0 = sample_instance(rng, 2, 3)
        policy = StopOnTrueIncreasePolicy(inner_lr=0.01, check_every=1000, cap=10000)
        tr = kernel_descent(inst, theta0, order=2, iterations=2, inner=policy)
        d = shift_count(3, 2)
        assert np.all(tr.evals_per_iteration >= d)
        assert np.all(tr.evals_per_iteration <= d + 9)
        assert tr.closing_evals == 0
        assert tr.total_evals == inst.eval_counter

    def test_values_are_true_values(self):
        rng = child_rng(332, "kd-vals")
        inst, theta0 = sample_instance(rng, 2, 3)
        tr = kernel_descent(inst, theta0, order=1, iterations=3,
                            inner=FixedStepsPolicy(k=20), alpha=0.5)
        for t in range(4):
            assert abs(tr.values[t] - inst.evaluate(tr.iterates[t])) < 1e-12

    def test_first_step_direction_matches_gd(self):
        # k=1: the single normalized step reproduces one gradient-descent
        # update because the surrogate gradient at theta_t is exact
        rng = child_rng(333, "kd-gd")
        inst, theta0 = sample_instance(rng, 2, 3)
        kd = kernel_descent(inst, theta0, order=1, iterations=1,
                            inner=FixedStepsPolicy(k=1), alpha=0.3)
        inst2, _ = sample_instance(child_rng(333, "kd-gd"), 2, 3)
        gd = gradient_descent(inst2, theta0, alpha=0.3, iterations=1)
        np.testing.assert_allclose(kd.iterates[1], gd.iterates[1], atol=1e-9)

    def test_1d_inner_reaches_surrogate_minimum(self):
        # with m=1 the surrogate equals f; many short steps should land
        # near the surrogate's stationary point along the descent path
        rng = child_rng(334, "kd-1d")
        inst, theta0 = sample_instance(rng, 2, 1)
        surr = build_surrogate(inst, theta0, 1)
        grid = theta0[0] + np.linspace(-np.pi, np.pi, 20001)
        dense = np.array([surr.value(np.array([t])) for t in grid])
        end, _ = inner_fixed_k(surr, theta0, k=4000, alpha=2.0 * np.pi)
        # the endpoint cannot do better than the global grid minimum
        assert surr.value(end) >= dense.min() - 1e-9
        # and the path must have found a real improvement
        assert surr.value(end) < surr.value(theta0)

    def test_validation(self):
        rng = child_rng(335, "kd-val")
        inst, theta0 = sample_instance(rng, 2, 2)
        with pytest.raises(ValueError):
            kernel_descent(inst, theta0, order=2, iterations=1,
                           inner=FixedStepsPolicy(k=5))  # alpha missing
        with pytest.raises(TypeError):
            kernel_descent(inst, theta0, order=2, iterations=1, inner="nope")
        with pytest.raises(ValueError):
            FixedStepsPolicy(k=0)


class TestQadDescent:
    def test_eval_accounting(self):
        rng = child_rng(340, "qad-cost")
        inst, theta0 = sample_instance(rng, 2, 3)
        policy = StopOnTrueIncreasePolicy(inner_lr=0.01, check_every=1000, cap=10000)
        tr = qad_descent(inst, theta0, iterations=2, inner=policy)
        base = 2 * 9 + 3 + 1
        assert np.all(tr.evals_per_iteration >= base)
        assert np.all(tr.evals_per_iteration <= base + 9)
        assert tr.total_evals == inst.eval_counter
        assert tr.algorithm == "qad"

    def test_requires_stop_policy(self):
        rng = child_rng(341, "qad-pol")
        inst, theta0 = sample_instance(rng, 2, 2)
        with pytest.raises(TypeError):
            qad_descent(inst, theta0, iterations=1, inner=FixedStepsPolicy(k=5))


class TestTraceCsv:
    def test_header(self):
        assert trace_csv_header(2) == \
            "run_id,algorithm,L,alpha,iteration,theta_0,theta_1,f_value,evals_cumulative"

    def test_rows_round_trip_floats(self):
        rng = child_rng(350, "csv")
        inst, theta0 = sample_instance(rng, 2, 2)
        tr = gradient_descent(inst, theta0, alpha=0.37, iterations=3)
        rows = trace_csv_rows("run-0", tr)
        assert len(rows) == 4
        for t, row in enumerate(rows):
            parts = row.split(",")
            assert parts[0] == "run-0"
            assert parts[1] == "gd"
            assert parts[2] == ""          # no surrogate order
            assert float(parts[3]) == 0.37
            assert int(parts[4]) == t
            # %.17g preserves doubles exactly
            assert float(parts[5]) == tr.iterates[t, 0]
            assert float(parts[6]) == tr.iterates[t, 1]
            assert float(parts[7]) == tr.values[t]
        assert int(rows[0].split(",")[-1]) == 1
        assert int(rows[-1].split(",")[-1]) == tr.total_evals

    def test_cumulative_column_for_kd(self):
        rng = child_rng(351, "csv-kd")
        inst, theta0 = sample_instance(rng, 2, 3)
        tr = kernel_descent(inst, theta0, order=2, iterations=2,
                            inner=FixedStepsPolicy(k=5), alpha=1.0)
        rows = trace_csv_rows(7, tr)
        cums = [int(r.split(",")[-1]) for r in rows]
        d = shift_count(3, 2)
        assert cums == [0, d, 2 * d + 1]
        assert rows[0].split(",")[2] == "2"

    def test_write_traces_csv(self):
        rng = child_rng(352, "csv-multi")
        inst, theta0 = sample_instance(rng, 2, 2)
        tr1 = gradient_descent(inst, theta0, alpha=0.1, iterations=1)
        tr2 = gradient_descent(inst, theta0, alpha=0.2, iterations=2)
        buf = io.StringIO()
        write_traces_csv(buf, [(0, tr1), (1, tr2)])
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == trace_csv_header(2)
        assert len(lines) == 1 + 2 + 3

    def test_write_rejects_mixed_m(self):
        tr1 = DescentTrace("gd", np.zeros((2, 2)), np.zeros(2),
                           np.ones(1, dtype=np.int64), 1, 0)
        tr2 = DescentTrace("gd", np.zeros((2, 3)), np.zeros(2),
                           np.ones(1, dtype=np.int64), 1, 0)
        with pytest.raises(ValueError):
            write_traces_csv(io.StringIO(), [(0, tr1), (1, tr2)])

    def test_write_rejects_empty(self):
        with pytest.raises(ValueError):
            write_traces_csv(io.StringIO(), [])
