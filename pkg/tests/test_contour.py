import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phiquad.contour import (
    UNIT_ROUNDOFF,
    ContourParams,
    QuadConfig,
    SectorBound,
    build_rule,
    compensated_sum,
    error_bound,
    hyperbola_derivative,
    hyperbola_point,
    invert,
    select_params_basic,
    select_params_eps,
    theta_objective,
)


def _params(mu=1.0, alpha=0.7, gamma=0.0):
    return ContourParams(alpha=alpha, d=0.6, mu=mu, tau=0.1, t0=1.0, Lambda=1.0, gamma=gamma, K=10)


class TestHyperbola:
    def test_vertex_value(self):
        # 1 - sin(0.7), 40-digit reference
        assert hyperbola_point(_params(), 0.0) == pytest.approx(0.3557823127623089463, abs=1e-15)

    def test_vertex_is_real(self):
        assert hyperbola_point(_params(mu=2.3, alpha=0.9, gamma=0.4), 0.0).imag == 0.0

    def test_conjugate_pair(self):
        p = _params()
        for x in (0.3, 1.7, 4.0):
            assert hyperbola_point(p, -x) == pytest.approx(np.conj(hyperbola_point(p, x)), rel=1e-15)

    def test_derivative_by_finite_differences(self):
        p = _params(mu=0.8)
        x, dx = 0.9, 1e-6
        fd = (hyperbola_point(p, x + dx) - hyperbola_point(p, x - dx)) / (2 * dx)
        assert hyperbola_derivative(p, x) == pytest.approx(fd, rel=1e-8)


class TestParameterSelection:
    def test_basic_k25(self):
        p = select_params_basic(25, 0.7, 0.6, t0=1.0, Lambda=1.0)
        # closed formulas evaluated at 40 digits
        assert p.tau == pytest.approx(0.17406302175352386469, rel=1e-13)
        assert p.mu == pytest.approx(0.86633246885625342218, rel=1e-13)
        assert p.tau * p.K == pytest.approx(4.3515755438380966173, rel=1e-13)
        assert p.theta_star is None

    def test_basic_k1_closed_form(self):
        p = select_params_basic(1, math.pi / 4, 0.5)
        assert p.tau == pytest.approx(math.log(1 + math.sqrt(2)), rel=1e-14)

    def test_doubling_t0_halves_mu(self):
        p1 = select_params_basic(20, t0=1.0)
        p2 = select_params_basic(20, t0=2.0)
        assert p2.mu == pytest.approx(p1.mu / 2, rel=1e-15)
        assert p2.tau == p1.tau

    @pytest.mark.parametrize("K,expected", [(15, 0.693), (25, 0.793)])
    def test_theta_star(self, K, expected):
        p = select_params_eps(K, 0.7, 0.6, eps=2.2204e-16)
        assert abs(p.theta_star - expected) < 0.01

    def test_theta_star_is_grid_minimum(self):
        p = select_params_eps(25)
        grid = np.arange(1, 1000) / 1000
        best = min(theta_objective(th, 25) for th in grid)
        assert theta_objective(p.theta_star, 25) <= best * (1 + 1e-12)

    def test_larger_eps_moves_theta_up(self):
        # a heavier eps-weighted term is damped by shrinking (1 - theta)
        lo = select_params_eps(25, eps=1e-16).theta_star
        hi = select_params_eps(25, eps=1e-4).theta_star
        assert hi > lo

    def test_eps_selection_with_theta_one_minus_inverse_K_is_basic(self):
        K = 20
        basic = select_params_basic(K)
        a = math.acosh(1.0 / ((1.0 / K) * math.sin(0.7)))
        assert basic.tau == pytest.approx(a / K)

    @pytest.mark.parametrize("eps", [0.0, 1.0, -1e-3, 2.0])
    def test_eps_rejected(self, eps):
        with pytest.raises(ValueError):
            select_params_eps(15, eps=eps)

    @pytest.mark.parametrize("alpha,d", [(0.5, 0.6), (1.0, 0.6), (0.7, 0.0 - 0.1)])
    def test_bad_angles(self, alpha, d):
        with pytest.raises(ValueError):
            select_params_basic(10, alpha, d)


class TestRule:
    def test_first_weight(self):
        p = select_params_basic(10)
        rule = build_rule(p)
        w0 = rule.weights[p.K]
        assert w0.imag == 0.0
        assert w0.real == pytest.approx(p.tau * p.mu * math.cos(p.alpha) / (2 * math.pi), rel=1e-15)
        assert w0.real > 0

    def test_weights_match_derivative_formula(self):
        p = select_params_basic(12)
        rule = build_rule(p)
        ell = np.arange(-12, 13)
        expected = -p.tau / (2j * math.pi) * hyperbola_derivative(p, ell * p.tau)
        np.testing.assert_allclose(rule.weights, expected, rtol=1e-14)

    @given(K=st.integers(1, 60), eps=st.one_of(st.none(), st.floats(1e-16, 1e-3)))
    @settings(max_examples=40, deadline=None)
    def test_symmetry_and_sector(self, K, eps):
        p = select_params_basic(K) if eps is None else select_params_eps(K, eps=eps)
        rule = build_rule(p)
        z, w = rule.nodes, rule.weights
        np.testing.assert_array_equal(z[::-1], np.conj(z))
        np.testing.assert_array_equal(w[::-1], np.conj(w))
        assert z[K].imag == 0.0 and w[K].imag == 0.0
        assert np.all(z.real - p.gamma <= p.mu * (1 - math.sin(p.alpha)) * (1 + 1e-14))
        assert np.all(np.abs(np.angle(z - p.gamma)) < math.pi - 0.0)

    def test_nodes_avoid_sector_of_admissible_delta(self):
        delta = math.pi / 2 - 0.7 - 0.6 - 1e-3
        rule = build_rule(select_params_basic(40))
        assert np.all(np.abs(np.angle(rule.nodes)) < math.pi - delta)

    def test_halved_weights(self):
        p = select_params_basic(8)
        full, half = build_rule(p), build_rule(p, halved=True)
        assert len(full) == 17 and len(half) == 9
        np.testing.assert_array_equal(half.nodes, full.nodes[8:])
        assert half.weights[0] == full.weights[8]
        np.testing.assert_allclose(half.weights[1:], 2 * full.weights[9:], rtol=0)

    def test_rules_are_immutable(self):
        rule = build_rule(select_params_basic(5))
        with pytest.raises(ValueError):
            rule.nodes[0] = 0

    def test_inverse_of_one_over_z_squared(self):
        K = 20
        rule = build_rule(select_params_basic(K))
        approx = invert(lambda z: 1 / z**2, 1.0, rule)
        bound = error_bound(K, t=1.0, sector=SectorBound(nu=2))
        assert abs(approx - 1.0) <= bound

    @pytest.mark.parametrize("lam", [-0.5, -3.0, 0.0])
    def test_halved_matches_full(self, lam):
        p = select_params_eps(25)
        F = lambda z: (2 - z) / (2 * z**3 * (z - lam))
        full = invert(F, 1.0, build_rule(p))
        half = invert(F, 1.0, build_rule(p, halved=True))
        assert abs(full.imag) < 1e-15
        assert abs(full.real - half) <= 10 * UNIT_ROUNDOFF * max(1.0, abs(half))

    @pytest.mark.parametrize("lam", [0.0, -1.0, -10.0])
    def test_known_pairs_basic_k35(self, lam):
        rule = build_rule(select_params_basic(35), halved=True)
        assert abs(invert(lambda z: 1 / (z - lam), 1.0, rule) - math.exp(lam)) <= 1e-10

    def test_config_caches_rules(self):
        cfg = QuadConfig(K=17)
        assert cfg.rule(2.0, True) is cfg.rule(2, True)


class TestErrorBound:
    DELTA = 0.27

    @pytest.mark.parametrize("lam", [0.0, -1.0, -10.0])
    @pytest.mark.parametrize("K", [5, 10, 15, 20, 25])
    def test_bound_dominates_observed_error(self, lam, K):
        # |1/(z - lam)| <= |z|^-1 / sin(delta) on |arg z| < pi - delta for lam <= 0
        M = 1.0 if lam == 0 else 1 / math.sin(self.DELTA)
        sector = SectorBound(0.0, self.DELTA, M, 1.0)
        rule = build_rule(select_params_basic(K), halved=True)
        err = abs(invert(lambda z: 1 / (z - lam), 1.0, rule) - math.exp(lam))
        assert err <= error_bound(K, t=1.0, sector=sector)

    def test_monotone_then_plateau(self):
        bounds = [error_bound(K, eps=1e-12) for K in range(5, 51)]
        diffs = np.diff(bounds)
        assert np.all(diffs < 0) or np.all(diffs[:20] < 0)
        floor = 1e-12 * error_bound(50, eps=1.0) / (1.0 + 1e-300)
        assert bounds[-1] == pytest.approx(floor, rel=1e-2)

    def test_eps_zero_rate(self):
        Ks = np.arange(10, 61, 5)
        logs = np.log([error_bound(int(K), eps=0.0) for K in Ks])
        x = Ks / np.log(Ks)
        slope, icpt = np.polyfit(x, logs, 1)
        resid = logs - (slope * x + icpt)
        assert slope < 0
        assert 1 - resid.var() / logs.var() > 0.99

    def test_nu_one_independent_of_t(self):
        b1 = error_bound(20, t=1.0, t0=1.0, Lambda=3.0)
        b2 = error_bound(20, t=2.5, t0=1.0, Lambda=3.0)
        assert b1 == b2

    def test_t_outside_window(self):
        with pytest.raises(ValueError):
            error_bound(20, t=0.5, t0=1.0)


def test_compensated_sum_recovers_cancellation():
    assert compensated_sum([1e16, 1.0, -1e16]) == 1.0
    assert compensated_sum([1e16 + 1j, 1.0 + 1e16j, -1e16, -1e16j]) == 1.0 + 1.0j
    arrs = [np.full(3, 1e16), np.ones(3), np.full(3, -1e16)]
    np.testing.assert_array_equal(compensated_sum(arrs), np.ones(3))
