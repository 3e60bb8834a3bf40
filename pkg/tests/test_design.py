import math
from fractions import Fraction

import numpy as np
import pytest

from adrctf.design import (
    ContinuousTuning,
    GainSet,
    PlantSpec,
    bandwidth_gains,
    build_system_matrices,
    continuous_tf_bandwidth,
    continuous_tf_general,
    continuous_tf_terms,
    controller_gains,
    observer_gains_ct,
    resolvent_polynomials,
)
from adrctf.errors import (
    DegenerateGainsError,
    DimensionMismatchError,
    InvalidBandwidthError,
    InvalidOrderError,
    UnsupportedOrderError,
)


def feedback_response_direct(plant, gains, s):
    """k^T (sI - A_cl)^-1 l / b0 by dense complex inversion."""
    mats = build_system_matrices(plant, gains)
    m = plant.n + 1
    x = np.linalg.solve(s * np.eye(m) - mats.A_cl, np.array(gains.l, dtype=complex))
    return np.dot(np.array(gains.k_ext), x) / plant.b0


def feedback_response_coeffs(tf, s):
    num = tf.K_I * (1 + sum(b * s ** (i + 1) for i, b in enumerate(tf.beta)))
    den = s * (1 + sum(a * s ** (i + 1) for i, a in enumerate(tf.alpha)))
    return num / den


class TestGains:
    def test_first_order_controller(self):
        assert controller_gains(1, 1.0) == (1.0,)

    def test_second_order_controller(self):
        assert controller_gains(2, 1.0) == (1.0, 2.0)

    def test_third_order_binomial(self):
        # (s+2)^3 = s^3 + 6 s^2 + 12 s + 8
        assert controller_gains(3, 2.0) == (8.0, 12.0, 6.0)

    def test_observer_first_and_second_order(self):
        assert observer_gains_ct(1, ContinuousTuning(1.0, 5.0)) == (10.0, 25.0)
        assert observer_gains_ct(2, ContinuousTuning(1.0, 5.0)) == (15.0, 75.0, 125.0)
        assert observer_gains_ct(1, ContinuousTuning(1.0, 1.0)) == (2.0, 1.0)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_controller_polynomial_matches_binomial(self, n):
        w = 1.7
        k = controller_gains(n, w)
        ours = np.array(list(k) + [1.0])
        ref = np.polynomial.polynomial.polypow([w, 1.0], n)
        np.testing.assert_allclose(ours, ref, rtol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_observer_charpoly_via_eigen_solver(self, n):
        tuning = ContinuousTuning(0.8, 3.0)
        l = np.array(observer_gains_ct(n, tuning))
        A = np.diag(np.ones(n), 1)
        Ao = A - np.outer(l, np.eye(n + 1)[0])
        ref = np.polynomial.polynomial.polypow([tuning.k_eso * tuning.omega_cl, 1.0], n + 1)
        np.testing.assert_allclose(np.poly(Ao)[::-1], ref, rtol=1e-12)

    def test_rejects_invalid_arguments(self):
        with pytest.raises(InvalidOrderError):
            controller_gains(0, 1.0)
        with pytest.raises(InvalidBandwidthError):
            controller_gains(1, 0.0)
        with pytest.raises(InvalidBandwidthError):
            ContinuousTuning(-1.0, 5.0)
        with pytest.raises(ValueError):
            PlantSpec(1, 0.0)
        with pytest.raises(ValueError):
            PlantSpec(1, math.nan)


class TestSystemMatrices:
    def test_first_order_closed_loop_matrix(self):
        m = build_system_matrices(PlantSpec(1, 1.0), GainSet((1.0,), (10.0, 25.0)))
        np.testing.assert_array_equal(m.A_cl, [[-11.0, 0.0], [-25.0, 0.0]])

    def test_zero_gains_leave_only_disturbance_compensation(self):
        # the extended gain vector always ends in 1, which cancels the chain's
        # coupling into the disturbance state even when every k_i and l_i is 0
        m = build_system_matrices(PlantSpec(1, 1.0), GainSet((0.0,), (0.0, 0.0)))
        np.testing.assert_array_equal(m.A, [[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_array_equal(m.A_cl, [[0.0, 0.0], [0.0, 0.0]])

    def test_second_order_entrywise(self):
        plant = PlantSpec(2, 2.0)
        gains = GainSet((1.0, 2.0), (15.0, 75.0, 125.0))
        m = build_system_matrices(plant, gains)
        A = np.diag([1.0, 1.0], 1)
        b = np.array([0.0, 2.0, 0.0])
        c = np.array([1.0, 0.0, 0.0])
        k = np.array([1.0, 2.0, 1.0])
        ref = A - np.outer(gains.l, c) - np.outer(b, k) / plant.b0
        np.testing.assert_array_equal(m.A_cl, ref)
        np.testing.assert_array_equal(m.b, b)
        np.testing.assert_array_equal(m.c, c)
        assert np.all(m.A_cl[:, -1] == 0.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            build_system_matrices(PlantSpec(2, 1.0), GainSet((1.0,), (10.0, 25.0)))
        with pytest.raises(DimensionMismatchError):
            GainSet((1.0,), (1.0, 2.0, 3.0))

    def test_matrices_are_read_only(self):
        m = build_system_matrices(PlantSpec(1, 1.0), GainSet((1.0,), (10.0, 25.0)))
        with pytest.raises(ValueError):
            m.A_cl[0, 0] = 5.0


class TestResolvent:
    def test_scalar(self):
        d, B = resolvent_polynomials([[0.0]])
        np.testing.assert_array_equal(d, [0.0, 1.0])
        np.testing.assert_array_equal(B[0], [[1.0]])

    def test_nilpotent(self):
        d, B = resolvent_polynomials([[0.0, 1.0], [0.0, 0.0]])
        np.testing.assert_array_equal(d, [0.0, 0.0, 1.0])
        np.testing.assert_array_equal(B[1], np.eye(2))
        np.testing.assert_array_equal(B[0], [[0.0, 1.0], [0.0, 0.0]])

    def test_closed_loop_example_has_origin_root(self):
        d, _ = resolvent_polynomials([[-11.0, 0.0], [-25.0, 0.0]])
        np.testing.assert_array_equal(d, [0.0, 11.0, 1.0])

    @pytest.mark.parametrize("s", [1.0, 1j, 2 + 3j])
    def test_adjugate_identity_at_probes(self, s, rng):
        M = rng.normal(size=(4, 4))
        d, B = resolvent_polynomials(M)
        adj = sum(B[i] * s**i for i in range(4))
        det = sum(d[i] * s**i for i in range(5))
        lhs = (s * np.eye(4) - M) @ adj
        np.testing.assert_allclose(lhs, det * np.eye(4), rtol=1e-10, atol=1e-10 * abs(det))

    def test_rejects_bad_shapes(self):
        with pytest.raises(DimensionMismatchError):
            resolvent_polynomials(np.zeros((2, 3)))
        with pytest.raises(DimensionMismatchError):
            resolvent_polynomials(np.zeros((2, 2)), m=3)


class TestContinuousTf:
    def test_first_order_example(self):
        tf = continuous_tf_general(PlantSpec(1, 1.0), bandwidth_gains(1, ContinuousTuning(1.0, 5.0)))
        assert tf.K_I == float(Fraction(25, 11))
        assert tf.alpha == (float(Fraction(1, 11)),)
        assert tf.beta == pytest.approx((1.4,), rel=1e-15)
        assert tf.gamma == pytest.approx((0.4,), rel=1e-15)
        assert tf.K_FF * 25.0 == pytest.approx(tf.K_I, rel=1e-12)

    def test_second_order_example(self):
        tf = continuous_tf_general(PlantSpec(2, 1.0), bandwidth_gains(2, ContinuousTuning(1.0, 5.0)))
        assert tf.K_I == pytest.approx(125 / 106, rel=1e-15)
        assert tf.alpha == pytest.approx((17 / 106, 1 / 106), rel=1e-15)
        assert tf.beta == pytest.approx((2.6, 2.32), rel=1e-15)
        assert tf.gamma == pytest.approx((0.6, 0.12), rel=1e-15)

    def test_b0_only_scales_integrator_and_feedforward(self):
        g = bandwidth_gains(1, ContinuousTuning(1.0, 5.0))
        a = continuous_tf_general(PlantSpec(1, 1.0), g)
        b = continuous_tf_general(PlantSpec(1, 2.0), g)
        assert b.K_I == pytest.approx(25 / 22, rel=1e-15)
        assert b.K_FF == pytest.approx(a.K_FF / 2, rel=1e-15)
        assert (a.alpha, a.beta, a.gamma) == (b.alpha, b.beta, b.gamma)

    def test_table_literals(self):
        tf = continuous_tf_bandwidth(PlantSpec(1, 1.0), ContinuousTuning(1.0, 5.0))
        assert tf.beta[0] == pytest.approx(1.4, rel=1e-15)
        tf2 = continuous_tf_bandwidth(PlantSpec(2, 1.0), ContinuousTuning(1.0, 5.0))
        assert tf2.gamma == pytest.approx((0.6, 0.12), rel=1e-15)

    def test_large_observer_bandwidth_limit(self):
        tf = continuous_tf_bandwidth(PlantSpec(1, 1.0), ContinuousTuning(1.0, 1e9))
        assert tf.alpha[0] < 1e-9
        assert tf.K_FF < 1e-9

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_feedback_matches_dense_inversion(self, n):
        plant = PlantSpec(n, 0.7)
        gains = bandwidth_gains(n, ContinuousTuning(1.3, 4.0))
        tf = continuous_tf_general(plant, gains)
        for s in (0.3j, 1.0j, 2 + 5j, 40j):
            ref = feedback_response_direct(plant, gains, s)
            assert feedback_response_coeffs(tf, s) == pytest.approx(ref, rel=1e-9)

    @pytest.mark.parametrize("n", [1, 2])
    def test_general_terms_column(self, n):
        plant = PlantSpec(n, 1.5)
        gains = GainSet(tuple(0.5 + i for i in range(n)), tuple(3.0 + 2 * i for i in range(n + 1)))
        a = continuous_tf_terms(plant, gains)
        b = continuous_tf_general(plant, gains)
        for name in ("alpha", "beta", "gamma"):
            np.testing.assert_allclose(getattr(a, name), getattr(b, name), rtol=1e-12)
        assert a.K_I == pytest.approx(b.K_I, rel=1e-12)

    def test_higher_orders_delegate(self):
        plant, t = PlantSpec(3, 1.0), ContinuousTuning(1.0, 5.0)
        assert continuous_tf_bandwidth(plant, t) == continuous_tf_general(plant, bandwidth_gains(3, t))
        with pytest.raises(UnsupportedOrderError):
            continuous_tf_terms(plant, bandwidth_gains(3, t))
        with pytest.raises(UnsupportedOrderError):
            continuous_tf_general(PlantSpec(6, 1.0), bandwidth_gains(6, t))

    def test_zero_gains_rejected(self):
        with pytest.raises(DegenerateGainsError):
            continuous_tf_general(PlantSpec(1, 1.0), GainSet((0.0,), (10.0, 25.0)))
