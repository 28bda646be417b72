import math

import numpy as np
import pytest

from helpers import fd_gradient, fd_hessian

from kerneldescent.baselines import parameter_shift_gradient
from kerneldescent.circuit import sample_instance
from kerneldescent.rng import child_rng
from kerneldescent.surrogate import (
    FOURIER_MAX_M,
    FourierForm,
    KernelSurrogate,
    SHIFT_STEP,
    build_surrogate,
    build_surrogate_general,
    enumerate_shifts,
    fourier_coefficients,
    fourier_of_kernel_mix,
    h_inner_product,
    kernel_k,
    kernel_ktilde,
    kernel_section_gram,
    shift_count,
    shift_set,
)


class TestKernel:
    def test_unit_diagonal(self):
        rng = np.random.default_rng(1)
        for m in (1, 3, 7):
            x = rng.uniform(-np.pi, np.pi, size=m)
            assert abs(kernel_ktilde(x, x) - 1.0) < 1e-15

    def test_product_form(self):
        x = np.array([0.3, -1.1])
        z = np.array([0.9, 0.4])
        want = np.prod((1.0 + 2.0 * np.cos(x - z)) / 3.0)
        assert abs(kernel_ktilde(x, z) - want) < 1e-15

    def test_scaled_kernel(self):
        x = np.array([0.2, 0.5, -0.7])
        z = np.zeros(3)
        want = (3.0 / (2.0 * np.pi)) ** 3 * kernel_ktilde(x, z)
        assert abs(kernel_k(x, z) - want) < 1e-15

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            kernel_ktilde(np.zeros(2), np.zeros(3))

    def test_reproducing_identity(self):
        # <K~_a, K~_b>_H = (2 pi / 3)^m K~(a, b)
        rng = np.random.default_rng(2)
        for m in (1, 2, 3):
            a = rng.uniform(-np.pi, np.pi, size=m)
            b = rng.uniform(-np.pi, np.pi, size=m)
            fa = fourier_of_kernel_mix(a[None], np.ones(1))
            fb = fourier_of_kernel_mix(b[None], np.ones(1))
            lhs = h_inner_product(fa, fb)
            rhs = (2.0 * np.pi / 3.0) ** m * kernel_ktilde(a, b)
            assert abs(lhs - rhs) < 1e-12


class TestShifts:
    def test_counts(self):
        assert shift_count(5, 1) == 11          # 2m + 1
        assert shift_count(5, 2) == 51          # 2m^2 + 1
        assert shift_count(4, 4) == 3 ** 4      # full grid
        for m in range(1, 9):
            for order in range(1, m + 1):
                want = sum((1 << k) * math.comb(m, k) for k in range(order + 1))
                shifts = enumerate_shifts(m, order)
                assert shift_count(m, order) == want
                assert shifts.shape == (want, m)

    def test_zero_shift_first(self):
        for m, order in ((3, 1), (4, 2), (3, 3)):
            shifts = enumerate_shifts(m, order)
            assert np.all(shifts[0] == 0.0)

    def test_rows_unique_and_bounded(self):
        shifts = enumerate_shifts(4, 2)
        assert len({tuple(r) for r in shifts}) == shifts.shape[0]
        nonzero = np.count_nonzero(shifts, axis=1)
        assert nonzero.max() <= 2
        vals = set(np.unique(shifts))
        assert vals <= {0.0, -SHIFT_STEP, SHIFT_STEP}

    def test_lexicographic_order(self):
        # encode 0 -> 0, -s -> 1, +s -> 2; rows must be strictly increasing
        shifts = enumerate_shifts(3, 3)
        codes = np.zeros(shifts.shape, dtype=int)
        codes[shifts < 0] = 1
        codes[shifts > 0] = 2
        keys = [tuple(r) for r in codes]
        assert keys == sorted(keys)

    def test_order_validation(self):
        with pytest.raises(ValueError):
            enumerate_shifts(3, 0)
        with pytest.raises(ValueError):
            enumerate_shifts(3, 4)

    def test_shift_set_wrapper(self):
        ss = shift_set(4, 2)
        assert ss.size == shift_count(4, 2)
        assert ss.m == 4 and ss.order == 2


class TestBuildSurrogate:
    def test_costs_d_evaluations(self):
        rng = child_rng(100, "build-cost")
        inst, theta0 = sample_instance(rng, 3, 4)
        for order in (1, 2):
            before = inst.eval_counter
            build_surrogate(inst, theta0, order)
            assert inst.eval_counter - before == shift_count(4, order)

    def test_interpolates_nodes(self):
        rng = child_rng(101, "nodes")
        inst, theta0 = sample_instance(rng, 3, 3)
        for order in (1, 2, 3):
            surr = build_surrogate(inst, theta0, order)
            for q, v in zip(surr.shifts, surr.values):
                assert abs(surr.value(theta0 + q) - v) < 1e-10

    def test_base_value_is_row_zero(self):
        rng = child_rng(102, "row0")
        inst, theta0 = sample_instance(rng, 3, 3)
        surr = build_surrogate(inst, theta0, 1)
        assert abs(surr.value(theta0) - surr.values[0]) < 1e-12

    def test_m1_surrogate_is_exact(self):
        # with m = 1 the order-1 grid is the full grid, so the surrogate
        # must equal f everywhere, not just at nodes
        rng = child_rng(103, "m1")
        inst, theta0 = sample_instance(rng, 2, 1)
        surr = build_surrogate(inst, theta0, 1)
        for t in np.linspace(-np.pi, np.pi, 17):
            theta = np.array([t])
            assert abs(surr.value(theta) - inst.evaluate(theta)) < 1e-12

    def test_periodic(self):
        rng = child_rng(104, "periodic")
        inst, theta0 = sample_instance(rng, 2, 3)
        surr = build_surrogate(inst, theta0, 2)
        probe = theta0 + 0.37
        base = surr.value(probe)
        for k in range(3):
            shifted = probe.copy()
            shifted[k] += 2 * np.pi
            assert abs(surr.value(shifted) - base) < 1e-12

    def test_json_round_trip(self):
        rng = child_rng(105, "sj")
        inst, theta0 = sample_instance(rng, 2, 3)
        surr = build_surrogate(inst, theta0, 2)
        back = KernelSurrogate.from_json(surr.to_json())
        np.testing.assert_array_equal(back.values, surr.values)
        np.testing.assert_array_equal(back.anchors, surr.anchors)
        probe = rng.uniform(-np.pi, np.pi, size=3)
        assert back.value(probe) == surr.value(probe)

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            KernelSurrogate(np.zeros(2), 1, np.zeros((3, 3)), np.zeros(3))
        with pytest.raises(ValueError):
            KernelSurrogate(np.zeros(2), 1, np.zeros((3, 2)), np.zeros(4))


class TestExactness:
    def test_single_axis(self):
        rng = child_rng(110, "axis1")
        inst, theta0 = sample_instance(rng, 3, 4)
        for order in (1, 2):
            surr = build_surrogate(inst, theta0, order)
            for k in range(4):
                for t in rng.uniform(-np.pi, np.pi, size=5):
                    theta = theta0.copy()
                    theta[k] += t
                    assert abs(surr.value(theta) - inst.evaluate(theta)) < 1e-9

    def test_two_axes_needs_order_two(self):
        rng = child_rng(111, "axis2")
        inst, theta0 = sample_instance(rng, 3, 4)
        s2 = build_surrogate(inst, theta0, 2)
        for k, l in ((0, 1), (1, 3), (2, 3)):
            for _ in range(4):
                theta = theta0.copy()
                theta[k] += rng.uniform(-np.pi, np.pi)
                theta[l] += rng.uniform(-np.pi, np.pi)
                assert abs(s2.value(theta) - inst.evaluate(theta)) < 1e-9

    def test_full_order_reconstructs_f(self):
        rng = child_rng(112, "full")
        for n, m in ((2, 2), (3, 3)):
            inst, theta0 = sample_instance(rng, n, m)
            surr = build_surrogate(inst, theta0, m)
            for _ in range(20):
                theta = rng.uniform(-np.pi, np.pi, size=m)
                assert abs(surr.value(theta) - inst.evaluate(theta)) < 1e-9


class TestDerivativeContact:
    def test_gradient_at_base_point(self):
        rng = child_rng(120, "grad")
        inst, theta0 = sample_instance(rng, 3, 4)
        ps = parameter_shift_gradient(inst, theta0)
        for order in (1, 2):
            surr = build_surrogate(inst, theta0, order)
            np.testing.assert_allclose(surr.gradient(theta0), ps, atol=1e-10)
        np.testing.assert_allclose(
            ps, fd_gradient(inst.evaluate, theta0), atol=1e-8)

    def test_value_and_gradient_consistent(self):
        rng = child_rng(121, "vg")
        inst, theta0 = sample_instance(rng, 2, 3)
        surr = build_surrogate(inst, theta0, 2)
        probe = theta0 + rng.uniform(-1, 1, size=3)
        v, g = surr.value_and_gradient(probe)
        assert abs(v - surr.value(probe)) < 1e-14
        np.testing.assert_allclose(g, surr.gradient(probe), atol=1e-14)
        np.testing.assert_allclose(g, fd_gradient(surr.value, probe), atol=1e-8)

    def test_hessian_contact_order_two(self):
        rng = child_rng(122, "hess")
        inst, theta0 = sample_instance(rng, 3, 3)
        surr = build_surrogate(inst, theta0, 2)
        hf = fd_hessian(inst.evaluate, theta0, h=1e-3)
        hs = fd_hessian(surr.value, theta0, h=1e-3)
        assert np.max(np.abs(hf - hs)) < 1e-4


class TestGeneralSurrogate:
    def test_matches_grid_surrogate(self):
        rng = child_rng(130, "gram")
        inst, theta0 = sample_instance(rng, 2, 3)
        surr = build_surrogate(inst, theta0, 2)
        gen = build_surrogate_general(surr.anchors, surr.values)
        for _ in range(10):
            theta = rng.uniform(-np.pi, np.pi, size=3)
            assert abs(gen.value(theta) - surr.value(theta)) < 1e-8

    def test_duplicate_points_consistent(self):
        rng = child_rng(131, "dup")
        pts = rng.uniform(-np.pi, np.pi, size=(5, 2))
        vals = rng.standard_normal(5)
        plain = build_surrogate_general(pts, vals)
        doubled = build_surrogate_general(
            np.vstack([pts, pts[2:3]]), np.append(vals, vals[2]))
        for _ in range(10):
            theta = rng.uniform(-np.pi, np.pi, size=2)
            assert abs(plain.value(theta) - doubled.value(theta)) < 1e-8

    def test_single_point_is_kernel_section(self):
        p = np.array([0.4, -0.9])
        gen = build_surrogate_general(p[None], np.array([2.5]))
        theta = np.array([1.0, 0.2])
        assert abs(gen.value(theta) - 2.5 * kernel_ktilde(p, theta)) < 1e-12

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            build_surrogate_general(np.zeros((3, 2)), np.zeros(4))


class TestFourier:
    def test_cosine_coefficients(self):
        # an m=1 surrogate of f(t) = cos(t) is cos itself, so its
        # coefficients must be (1/2, 0, 1/2)
        shifts = enumerate_shifts(1, 1)
        values = np.cos(shifts[:, 0])
        surr = KernelSurrogate(np.zeros(1), 1, shifts, values)
        form = fourier_coefficients(surr)
        np.testing.assert_allclose(
            form.coeffs, np.array([0.5, 0.0, 0.5]), atol=1e-14)

    def test_form_value_matches_surrogate(self):
        rng = child_rng(140, "fval")
        inst, theta0 = sample_instance(rng, 2, 2)
        surr = build_surrogate(inst, theta0, 2)
        form = fourier_coefficients(surr)
        assert form.is_conjugate_symmetric()
        for _ in range(5):
            theta = rng.uniform(-np.pi, np.pi, size=2)
            fv = form.value(theta)
            assert abs(fv.imag) < 1e-12
            assert abs(fv.real - surr.value(theta)) < 1e-12

    def test_general_surrogate_coefficients(self):
        rng = child_rng(141, "gform")
        pts = rng.uniform(-np.pi, np.pi, size=(4, 2))
        vals = rng.standard_normal(4)
        gen = build_surrogate_general(pts, vals)
        form = fourier_coefficients(gen)
        theta = rng.uniform(-np.pi, np.pi, size=2)
        assert abs(form.value(theta).real - gen.value(theta)) < 1e-12

    def test_cos_norm(self):
        # <cos, cos>_H = pi
        form = FourierForm(1, np.array([0.5, 0.0, 0.5]))
        assert abs(h_inner_product(form, form) - np.pi) < 1e-12

    def test_orthonormal_sections(self):
        for m in (1, 2):
            p = np.full(m, 0.3)
            gram = kernel_section_gram(p)
            assert np.max(np.abs(gram - np.eye(3 ** m))) < 1e-10

    def test_wrong_spacing_breaks_orthonormality(self):
        gram = kernel_section_gram(np.zeros(1), spacing=np.pi / 2)
        assert np.max(np.abs(gram - np.eye(3))) > 1e-3

    def test_dimension_cap(self):
        with pytest.raises(ValueError):
            fourier_of_kernel_mix(np.zeros((1, FOURIER_MAX_M + 1)), np.ones(1))

    def test_form_shape_validation(self):
        with pytest.raises(ValueError):
            FourierForm(2, np.zeros((3, 4)))
