import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from rmls.engine import ideal_measurement_trace
from rmls.hamiltonian import Family, HamiltonianFamily, gap_lower_bound
from rmls.linalg import phase_align
from rmls.schedule import (build_schedule, ds_dv, gate_cost_estimate, integral_closed_form,
                           num_steps, path_length_bound, ratio_table, s_of_v, sample_times,
                           taylor_order, total_time_bound, v_bounds)

from conftest import random_instance

# 30-digit mpmath evaluations of the closed forms for v_a, v_b and L*
V_BOUNDS = {
    1.0: (-0.881373587019543025232609324980, 0.881373587019543025232609324980),
    2.0: (-0.949300947316440730548980114464, 1.48545969939530051126646046339),
}


class TestNaturalParametrization:

    @pytest.mark.parametrize("kappa", [1.0, 2.0, 10.0, 50.0, 1000.0])
    def test_endpoints(self, kappa):
        va, vb = v_bounds(kappa)
        assert abs(s_of_v(va, kappa)) <= 1e-12
        assert abs(s_of_v(vb, kappa) - 1) <= 1e-12

    def test_midpoint_kappa_one(self):
        assert s_of_v(0.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("kappa", [1.0, 2.0])
    def test_v_bounds_values(self, kappa):
        va, vb = v_bounds(kappa)
        assert va == pytest.approx(V_BOUNDS[kappa][0], abs=1e-14)
        assert vb == pytest.approx(V_BOUNDS[kappa][1], abs=1e-14)

    def test_antisymmetric_at_kappa_one(self):
        va, vb = v_bounds(1.0)
        assert va == pytest.approx(-vb, abs=1e-15)

    @pytest.mark.parametrize("kappa", [1.0, 2.0, 10.0, 50.0])
    def test_derivative(self, kappa):
        va, vb = v_bounds(kappa)
        h = 1e-5
        for v in np.linspace(va + 2 * h, vb - 2 * h, 41):
            fd = (s_of_v(v + h, kappa) - s_of_v(v - h, kappa)) / (2 * h)
            assert fd == pytest.approx(ds_dv(s_of_v(v, kappa), kappa), abs=1e-6)

    def test_monotone(self):
        va, vb = v_bounds(10.0)
        s = [s_of_v(v, 10.0) for v in np.linspace(va, vb, 200)]
        assert np.all(np.diff(s) > 0)

    def test_out_of_range(self):
        va, vb = v_bounds(3.0)
        with pytest.raises(ValueError):
            s_of_v(vb + 1e-6, 3.0)
        with pytest.raises(ValueError):
            s_of_v(va - 1e-6, 3.0)


class TestPathLength:

    def test_values(self):
        assert path_length_bound(10.0) == pytest.approx(6.77053575239157452, abs=1e-12)
        assert path_length_bound(1.0) == pytest.approx(3.51418868536128083, abs=1e-12)
        va, vb = v_bounds(1.0)
        assert vb - va == pytest.approx(1.76274717403908605, abs=1e-12)

    def test_bound_holds(self):
        for kappa in np.geomspace(1, 1000, 200):
            va, vb = v_bounds(kappa)
            assert vb - va <= math.sqrt(2) * math.log(12 * kappa)

    def test_monotone(self):
        vals = [path_length_bound(k) for k in np.geomspace(1, 1e4, 50)]
        assert np.all(np.diff(vals) > 0)


class TestNumSteps:

    def test_values(self):
        # 2 ln^2(120) = 45.84..., 2 ln^2(12) = 12.35...
        assert num_steps(10.0, 0.1) == 459
        assert num_steps(1.0, 0.5) == 25

    def test_linear_in_inverse_epsilon(self):
        q1, q2 = num_steps(10.0, 0.1), num_steps(10.0, 0.05)
        assert abs(q2 - 2 * q1) <= 2

    @pytest.mark.parametrize("eps", [0.0, 1.0, -0.1])
    def test_bad_epsilon(self, eps):
        with pytest.raises(ValueError):
            num_steps(10.0, eps)


class TestBuildSchedule:

    @pytest.mark.parametrize("family", list(Family))
    def test_structure(self, family):
        sch = build_schedule(10.0, 0.1, family)
        assert sch.q == 459
        assert sch.s[-1] == 1.0
        assert sch.s[0] > 0
        assert np.all(np.diff(sch.s) > 0)
        assert np.all(sch.time_widths > 0)
        np.testing.assert_allclose(np.diff(sch.v), sch.delta, rtol=1e-9)
        assert sch.v[-1] == sch.v_b

    def test_last_width(self):
        assert build_schedule(10.0, 0.1, Family.GROUND).time_widths[-1] == pytest.approx(
            2 * math.pi * 100)
        assert build_schedule(10.0, 0.1, Family.AMPLIFIED).time_widths[-1] == pytest.approx(
            2 * math.pi * 10)

    def test_expected_total(self):
        sch = build_schedule(5.0, family=Family.GROUND, q=40)
        expected = sum(math.pi / gap_lower_bound(s, 5.0) for s in sch.s)
        assert sch.expected_total_time == pytest.approx(expected, rel=1e-12)

    def test_explicit_q(self):
        sch = build_schedule(5.0, family=Family.AMPLIFIED, q=7)
        assert sch.q == 7 and len(sch.points()) == 7

    def test_rejects_zero_q(self):
        with pytest.raises(ValueError):
            build_schedule(5.0, family=Family.AMPLIFIED, q=0)


class TestSampleTimes:

    def test_range_and_determinism(self):
        sch = build_schedule(10.0, family=Family.GROUND, q=50)
        t = sample_times(sch, np.random.default_rng(3))
        assert np.all(t >= 0) and np.all(t <= sch.time_widths)
        assert np.array_equal(t, sample_times(sch, np.random.default_rng(3)))

    def test_mean(self):
        sch = build_schedule(10.0, family=Family.AMPLIFIED, q=5)
        rng = np.random.default_rng(8)
        draws = np.array([sample_times(sch, rng) for _ in range(10_000)])
        width = sch.time_widths
        sigma = width / math.sqrt(12) / math.sqrt(10_000)
        assert np.all(np.abs(draws.mean(axis=0) - width / 2) <= 3 * sigma)

    def test_total_at_most_twice_expected(self):
        sch = build_schedule(10.0, family=Family.GROUND, q=30)
        rng = np.random.default_rng(1)
        for _ in range(200):
            assert sample_times(sch, rng).sum() <= 2 * sch.expected_total_time


class TestTimeBounds:

    @pytest.mark.parametrize("kappa", [2.0, 10.0, 50.0])
    def test_ground_integral(self, kappa):
        val, _ = quad(lambda s: math.sqrt(2) / gap_lower_bound(s, kappa) ** 1.5, 0, 1,
                      epsabs=0, epsrel=1e-12, limit=200)
        assert val == pytest.approx(integral_closed_form(kappa, Family.GROUND), rel=1e-6)

    @pytest.mark.parametrize("kappa", [2.0, 10.0, 50.0])
    def test_amplified_integral(self, kappa):
        val, _ = quad(lambda s: math.sqrt(2) / gap_lower_bound(s, kappa), 0, 1,
                      epsabs=0, epsrel=1e-12, limit=200)
        assert val == pytest.approx(integral_closed_form(kappa, Family.AMPLIFIED), rel=1e-6)

    @pytest.mark.parametrize("family", list(Family))
    def test_schedule_sum_below_bound(self, family):
        for kappa, eps in [(10.0, 0.1), (2.0, 0.05), (50.0, 0.2)]:
            sch = build_schedule(kappa, eps, family)
            assert sch.expected_total_time <= total_time_bound(kappa, sch.delta, family)

    def test_growth_exponents(self):
        ground = ratio_table([500.0, 1000.0, 2000.0], 0.1, Family.GROUND)
        amp = ratio_table([500.0, 1000.0, 2000.0], 0.1, Family.AMPLIFIED)
        assert all(3.4 <= r <= 4.6 for r in ground)
        assert all(1.8 <= r <= 2.4 for r in amp)


class TestGateCost:

    def test_reference_point(self):
        m = gate_cost_estimate(100.0, 4, 0.01)
        assert m.tau == pytest.approx(1000.0)
        assert m.r == 1443
        # enumerate K directly: (ln 2)^(K+1)/(K+1)! <= 0.01/1443 first holds at K = 7
        k = next(k for k in range(50)
                 if math.log(2) ** (k + 1) / math.factorial(k + 1) <= 0.01 / 1443)
        assert m.K == k == 7
        assert m.queries == 2 * 1443 * 7

    def test_deterministic(self):
        assert gate_cost_estimate(321.0, 5, 0.03) == gate_cost_estimate(321.0, 5, 0.03)

    def test_taylor_order_matches_enumeration(self):
        for eps in np.geomspace(1e-12, 0.5, 40):
            k = next(k for k in range(80)
                     if math.log(2) ** (k + 1) / math.factorial(k + 1) <= eps)
            assert taylor_order(eps) == k

    def test_monotone(self):
        base = gate_cost_estimate(100.0, 4, 0.01).queries
        assert gate_cost_estimate(200.0, 4, 0.01).queries > base
        assert gate_cost_estimate(100.0, 5, 0.01).queries > base
        assert gate_cost_estimate(100.0, 4, 0.001).queries >= base

    def test_symbolic_gate_count(self):
        assert gate_cost_estimate(10.0, 1, 0.1).gate_count_formula().endswith("(n + C_M)")


class TestDiscretizationProperties:

    @settings(max_examples=10, deadline=None)
    @given(st.integers(2, 3), st.integers(0, 5000))
    def test_natural_parametrization_speed(self, n, seed):
        inst = random_instance(n, seed)
        fam = HamiltonianFamily(inst)
        va, vb = v_bounds(inst.kappa)
        h = 1e-5
        for v in np.linspace(va, vb - h, 25):
            x0 = fam.eigenpath_state(s_of_v(v, inst.kappa))
            x1 = phase_align(x0, fam.eigenpath_state(s_of_v(v + h, inst.kappa)))
            assert np.linalg.norm(x1 - x0) / h <= 1 + 1e-3

    def test_per_step_infidelity(self, inst_k10):
        sch = build_schedule(inst_k10.kappa, family=Family.GROUND, q=60)
        fids, p = ideal_measurement_trace(inst_k10, sch)
        assert len(fids) == 60
        assert max(1 - f for f in fids) <= sch.delta ** 2 + 1e-9
        assert p >= 1 - sch.q * sch.delta ** 2
