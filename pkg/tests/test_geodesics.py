import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modelcr.geodesics import (
    action_identity_check,
    cc_distance_k1,
    critical_point,
    k2_constants,
    k2_count_bounds,
    k2_taxis_lengths,
    mu_fn,
    mu_prime,
    mu_root_brackets,
    nu_fn,
    solve_geodesics_k1,
    taxis_lengths_k1,
)
from conftest import sign_change_count
from modelcr.special import q_constant

# 50-digit mpmath value of (K^4 / (4 Q))^(1/4)
K2_FIRST_LENGTH_ORACLE = 0.97273331475496326277


queries = st.tuples(
    st.floats(-3, 3).filter(lambda v: abs(v) > 1e-2),
    st.floats(-3, 3),
    st.floats(-50, 50),
)


class TestProfiles:
    def test_mu_small_argument(self):
        assert mu_fn(0.0) == 0
        for z in (1e-6, 1e-5, 5e-5):
            assert mu_fn(z) == pytest.approx(2 * z / 3, rel=1e-8)

    def test_mu_values(self):
        assert mu_fn(math.pi / 2) == pytest.approx(math.pi / 2, rel=1e-15)
        z = np.linspace(-3, 3, 101)
        assert np.allclose(mu_fn(-z), -mu_fn(z), rtol=1e-14, atol=1e-15)

    def test_mu_series_matches_formula_at_threshold(self):
        for z in (0.99e-4, 1.01e-4):
            exact = z / math.sin(z) ** 2 - 1 / math.tan(z)
            assert mu_fn(z) == pytest.approx(exact, rel=1e-7)

    def test_mu_pole(self):
        with pytest.raises(ValueError):
            mu_fn(2 * math.pi)

    def test_mu_increasing_on_principal_interval(self):
        z = np.linspace(-math.pi + 1e-3, math.pi - 1e-3, 10_000)
        assert np.all(np.diff(mu_fn(z)) > 0)

    def test_mu_prime_against_differences(self, rng):
        z = rng.uniform(0.05, 20, 200)
        z = z[np.abs(np.sin(z)) > 0.1]
        h = 1e-6
        fd = (mu_fn(z + h) - mu_fn(z - h)) / (2 * h)
        assert np.allclose(mu_prime(z), fd, rtol=1e-6)

    def test_critical_values(self):
        for m in range(1, 11):
            xm = critical_point(m)
            assert mu_fn(xm) == pytest.approx(xm, rel=1e-13)
            assert mu_prime(xm) == pytest.approx(0, abs=1e-9)
            assert mu_fn(xm) + math.pi < mu_fn(critical_point(m + 1))

    def test_nu_values(self):
        assert nu_fn(0.0) == 1
        assert nu_fn(math.pi / 2) == pytest.approx((math.pi**2 / 4) / (math.pi / 2 + 1), rel=1e-15)
        z = np.linspace(1e-3, math.pi - 1e-3, 1000)
        assert np.all(nu_fn(z) > 0)

    def test_nu_series_continuity(self):
        for z in (0.99e-4, 1.01e-4):
            exact = z * z / (z + math.sin(z) ** 2 - math.sin(z) * math.cos(z))
            assert nu_fn(z) == pytest.approx(exact, rel=1e-7)


class TestBrackets:
    def test_zero_ratio(self):
        assert mu_root_brackets(0.0) == [(0.0, 0.0)]

    def test_small_ratio(self):
        assert len(mu_root_brackets(0.5 * critical_point(1))) == 1

    def test_just_above_first_critical_value(self):
        brackets = mu_root_brackets(float(mu_fn(critical_point(1))) + 1e-6)
        assert len(brackets) == 3
        assert brackets[0][1] < math.pi < brackets[1][0] < brackets[2][1] < 2 * math.pi

    def test_invalid(self):
        with pytest.raises(ValueError):
            mu_root_brackets(-1.0)

    def test_count_matches_grid_oracle(self, rng):
        for ratio in 10 ** rng.uniform(-2, 2, 100):
            assert len(solve_geodesics_k1((1.0, 0.0), ratio)) == sign_change_count(ratio)


class TestSolver:
    def test_straight_line(self):
        sols = solve_geodesics_k1((0.6, -0.8), 0.0)
        assert len(sols) == 1
        assert sols[0].length == pytest.approx(1.0, abs=1e-12)

    def test_many_geodesics_for_large_ratio(self):
        assert len(solve_geodesics_k1((1.0, 0.0), 1e3)) > 10
        assert sign_change_count(1e3) > 10

    @given(queries)
    def test_defining_relations(self, q):
        x1, x2, t = q
        r2 = x1 * x1 + x2 * x2
        sols = solve_geodesics_k1((x1, x2), t)
        lengths = [s.length for s in sols]
        assert lengths == sorted(lengths)
        assert [s.branch_index for s in sols] == list(range(1, len(sols) + 1))
        for s in sols:
            assert abs(abs(t) - mu_fn(s.tau) * r2) <= 1e-10 * (1 + abs(t))
            assert s.length**2 == pytest.approx(nu_fn(s.tau) * (r2 + abs(t)), rel=1e-12)

    @given(queries, st.floats(0.1, 10))
    def test_dilation(self, q, r):
        x1, x2, t = q
        base = solve_geodesics_k1((x1, x2), t)
        scaled = solve_geodesics_k1((r * x1, r * x2), r * r * t)
        assert len(base) == len(scaled)
        for a, b in zip(base, scaled):
            assert b.tau == pytest.approx(a.tau, rel=1e-9, abs=1e-12)
            assert b.length == pytest.approx(r * a.length, rel=1e-9)

    def test_time_sign_symmetry(self):
        a, b = solve_geodesics_k1((0.3, 0.4), 2.0), solve_geodesics_k1((0.3, 0.4), -2.0)
        assert [s.length for s in a] == [s.length for s in b]

    def test_axis_rejected(self):
        with pytest.raises(ValueError):
            solve_geodesics_k1((0.0, 0.0), 1.0)


class TestAxis:
    def test_first_length(self):
        assert taxis_lengths_k1(math.pi, 1)[0] == pytest.approx(math.pi, rel=1e-15)

    def test_formula_and_geometry(self):
        t = -2.7
        lengths, radii, areas = taxis_lengths_k1(t, 40, with_geometry=True)
        m = np.arange(1, 41)
        assert np.all(np.diff(lengths) > 0)
        assert np.allclose(lengths**2, m * math.pi * abs(t), rtol=1e-15)
        assert np.allclose(radii, 0.5 * np.sqrt(abs(t) / (m * math.pi)), rtol=1e-15)
        assert np.all(areas * 4 * m == pytest.approx(abs(t), rel=1e-15))

    def test_zero_time(self):
        with pytest.raises(ValueError):
            taxis_lengths_k1(0.0)

    def test_distance(self):
        assert cc_distance_k1((0.6, 0.8), 0.0) == pytest.approx(1.0)
        assert cc_distance_k1((0.0, 0.0), 2.0) == pytest.approx(math.sqrt(2 * math.pi))
        with pytest.raises(ValueError):
            cc_distance_k1((0.0, 0.0), 0.0)

    @given(st.floats(0.05, 2), st.floats(-5, 5))
    def test_distance_is_shortest_of_all_lengths(self, r, t):
        assert cc_distance_k1((r, 0.0), t) == pytest.approx(min(s.length for s in solve_geodesics_k1((r, 0.0), t)))

    def test_length_identity(self, rng):
        for _ in range(50):
            r, t = rng.uniform(0.2, 2), rng.uniform(-10, 10)
            for s in solve_geodesics_k1((r, 0.0), t):
                assert s.length == pytest.approx(r * s.tau / abs(math.sin(s.tau)) if s.tau else r, rel=1e-9)

    def test_distance_continuity_toward_axis(self):
        t = 1.7
        assert cc_distance_k1((1e-3, 0.0), t) == pytest.approx(math.sqrt(math.pi * t), rel=1e-2)

    def test_off_axis_families_approach_axis_lengths(self):
        t, eps = 2.0, 1e-3
        sols = solve_geodesics_k1((eps, 0.0), t, m_max=6)
        axis = taxis_lengths_k1(t, 5)
        for m in range(1, 6):
            near = min(abs(s.length - axis[m - 1]) for s in sols)
            assert near < 1e-2 * axis[m - 1]


class TestActionIdentity:
    def test_straight_line(self):
        sols = solve_geodesics_k1((0.3, 0.4), 0.0)
        assert action_identity_check((0.3, 0.4), 0.0, sols) < 1e-14
        assert 0.5 * sols[0].length ** 2 == pytest.approx(0.5 * 0.25)

    @given(queries)
    def test_random_queries(self, q):
        x1, x2, t = q
        sols = solve_geodesics_k1((x1, x2), t)
        assert action_identity_check((x1, x2), t, sols) < 1e-8 * (x1 * x1 + x2 * x2 + abs(t))

    def test_axis_limit(self):
        t, eps = 1.3, 1e-4
        sols = solve_geodesics_k1((eps, 0.0), t, m_max=4)
        half_sq = sorted(0.5 * s.length**2 for s in sols)
        for m in (1, 2, 3):
            assert min(abs(v - 0.5 * m * math.pi * t) for v in half_sq) < 1e-3 * m * t


class TestStepFour:
    def test_ratio(self):
        d = k2_taxis_lengths(0.37, 40)
        m = np.arange(1, 21)
        assert np.allclose(d[2 * m - 1] / d[m - 1], 2**0.75, rtol=1e-15, atol=0)

    def test_inversion(self):
        K, Q = k2_constants()
        t = -3.1
        d = k2_taxis_lengths(t, 10)
        assert np.allclose(d**4 * 4 * Q / (K**4 * abs(t)), np.arange(1, 11) ** 3, rtol=1e-14)

    def test_first_length_oracle(self):
        assert k2_taxis_lengths(1.0, 1)[0] == pytest.approx(K2_FIRST_LENGTH_ORACLE, rel=1e-13)

    def test_count_bounds_at_boundary(self):
        t = 4 * q_constant() / 3
        assert k2_count_bounds((1.0, 0.0), t) == (1, 1, 3)

    def test_just_above_half(self):
        t = (4 / 3) * 0.5 * q_constant() * (1 + 1e-9)
        assert k2_count_bounds((1.0, 0.0), t)[0] == 1

    def test_monotone(self):
        ms = [k2_count_bounds((0.8, 0.3), t)[0] for t in np.linspace(1.5, 80, 400)]
        assert np.all(np.diff(ms) >= 0)
        assert ms[-1] > ms[0]

    def test_errors(self):
        with pytest.raises(ValueError):
            k2_count_bounds((0.0, 0.0), 1.0)
        with pytest.raises(ValueError):
            k2_count_bounds((1.0, 0.0), 0.0)
        with pytest.raises(ValueError):
            k2_taxis_lengths(0.0)
