import math

import numpy as np
import pytest

from emholder.bounds import (BoundParams, GronwallReport, bound_four_point,
                             bound_full, bound_moment, bound_spatial_time,
                             bound_strong_error, bound_time_space, gronwall_check,
                             gronwall_lp_check, lyapunov_check, second_order_check)
from emholder.exceptions import PremiseError
from emholder.models import LyapunovSpec, builtin, default_lyapunov


@pytest.fixture
def arctan_params():
    return BoundParams.from_model(builtin("arctan_tan"), 4.0, 1.0)


def _rederive_strong_error(params, x, s, t, grid_mesh):
    # independent re-derivation used as the duplicate-formula oracle
    B = math.sqrt(params.T) + params.p
    v = float(params.lyapunov.value(np.atleast_1d(x)))
    return (math.sqrt(2.0) * params.c * B ** 2
            * math.exp(params.c ** 2 * B ** 2 * params.T)
            * (math.exp(1.5 * params.cbar * params.T) * v) ** (1.0 / params.p)
            * math.sqrt(t - s) * math.sqrt(grid_mesh))


class TestClosedFormBounds:
    def test_moment_zero_elapsed(self, arctan_params):
        x = np.array([1.0])
        v = float(arctan_params.lyapunov.value(x))
        assert bound_moment(arctan_params, x, 0.5, 0.5) == v

    def test_moment_zero_growth_constant(self):
        params = BoundParams.from_model(builtin("constant", mu0=0.3, sigma0=0.7), 4.0, 1.0)
        x = np.array([2.0])
        assert params.cbar == 0.0
        assert bound_moment(params, x, 0.0, 1.0) == float(params.lyapunov.value(x))

    def test_moment_duplicate_formula(self, arctan_params):
        x = np.array([1.0])
        got = bound_moment(arctan_params, x, 0.25, 0.75)
        v = float(arctan_params.lyapunov.value(x))
        expected = math.exp(1.5 * arctan_params.cbar * 0.5) * v
        assert got == pytest.approx(expected, rel=4e-16)

    def test_strong_error_vanishes_with_mesh(self, arctan_params):
        assert bound_strong_error(arctan_params, np.array([1.0]), 0.0, 1.0, 0.0) == 0.0

    def test_strong_error_vanishes_at_equal_times(self, arctan_params):
        assert bound_strong_error(arctan_params, np.array([1.0]), 0.5, 0.5, 0.25) == 0.0

    def test_strong_error_mesh_scaling(self, arctan_params):
        x = np.array([1.0])
        one = bound_strong_error(arctan_params, x, 0.0, 1.0, 0.125)
        two = bound_strong_error(arctan_params, x, 0.0, 1.0, 0.25)
        assert two == pytest.approx(math.sqrt(2.0) * one, rel=4e-16)

    def test_strong_error_duplicate_formula(self, arctan_params):
        got = bound_strong_error(arctan_params, np.array([1.0]), 0.25, 0.75, 0.125)
        assert got == pytest.approx(
            _rederive_strong_error(arctan_params, np.array([1.0]), 0.25, 0.75, 0.125),
            rel=4e-16)

    def test_spatial_time_vanishes_at_equal_starts(self, arctan_params):
        x = np.array([1.0])
        assert bound_spatial_time(arctan_params, x, x, 0.25, 0.75) == 0.0

    def test_four_point_degenerate(self, arctan_params):
        x = np.array([1.0])
        assert bound_four_point(arctan_params, x, x, x, x, 0.0, 1.0, 0.0) == 0.0

    def test_full_coincident_arguments(self, arctan_params):
        x = np.array([1.0])
        assert bound_full(arctan_params, x, x, 0.25, 0.25, 0.75, 0.75, 0.125) == 0.0

    def test_order_requirement(self):
        params = BoundParams.from_model(builtin("arctan_tan"), 2.0, 1.0)
        x = np.array([1.0])
        with pytest.raises(ValueError):
            bound_four_point(params, x, x, x, x, 0.0, 1.0, 0.25)
        with pytest.raises(ValueError):
            bound_full(params, x, x, 0.0, 0.0, 1.0, 1.0, 0.25)

    def test_infinite_b_uses_zero_times_inf(self):
        lyap = default_lyapunov(builtin("arctan_tan"), 4.0)
        params = BoundParams(T=1.0, c=1.0, cbar=lyap.cbar, b=math.inf, p=4.0,
                             lyapunov=lyap)
        x = np.array([1.0])
        y = np.array([0.5])
        # zero geometric factor: the b terms vanish by convention
        assert bound_four_point(params, x, x, y, y, 0.0, 1.0, 0.25) == 0.0
        assert bound_full(params, x, x, 0.0, 0.25, 0.5, 1.0, 0.25) == math.inf
        assert np.isinf(bound_four_point(params, x, np.array([2.0]), y, y, 0.0, 1.0, 0.25))

    def test_monotone_in_mesh_time_and_distance(self, arctan_params):
        rng = np.random.default_rng(0)
        for _ in range(50):
            x = rng.normal(size=1)
            xt = x + rng.normal(size=1)
            m1, m2 = sorted(rng.uniform(0.0, 0.5, 2))
            t1, t2 = sorted(rng.uniform(0.5, 1.0, 2))
            assert (bound_strong_error(arctan_params, x, 0.0, t1, m1)
                    <= bound_strong_error(arctan_params, x, 0.0, t2, m2))
            assert (bound_full(arctan_params, x, xt, 0.0, 0.25, 0.5, t1, m1)
                    <= bound_full(arctan_params, x, xt, 0.0, 0.25, 0.5, t2, m2))
            near = x + 0.5 * (xt - x)
            assert (bound_spatial_time(arctan_params, x, near, 0.5, t1)
                    <= bound_spatial_time(arctan_params, x, xt, 0.5, t1))

    def test_time_space_duplicate_formula(self, arctan_params):
        x, xt = np.array([1.0]), np.array([0.5])
        got = bound_time_space(arctan_params, x, xt, 0.0, 0.25, 0.5, 1.0)
        B = math.sqrt(1.0) + 4.0
        e1 = math.exp(1.0 * B * B)
        vx = float(arctan_params.lyapunov.value(x)) ** 0.25
        vxt = float(arctan_params.lyapunov.value(xt)) ** 0.25
        expected = (math.sqrt(2.0) * 0.5 * e1
                    + 5.0 * e1 * B * math.exp(1.5 * arctan_params.cbar / 4.0)
                    * 0.5 * (vx + vxt) * (math.sqrt(0.25) + math.sqrt(0.5)))
        assert got == pytest.approx(expected, rel=4e-16)


class TestGronwall:
    def test_equality_case(self):
        report = gronwall_check(math.exp, 0.0, 1.0, 1e-4, a=1.0, c=1.0)
        assert report.premise_residual <= 1e-3
        assert report.conclusion_excess <= 1e-9
        assert report.passed

    def test_constant_case_zero_slack(self):
        report = gronwall_check(lambda t: 2.0, 0.0, 1.0, 1e-3, a=2.0, c=0.0)
        assert report.premise_residual <= 0.0
        assert report.conclusion_excess == 0.0
        assert report.min_slack == 0.0

    def test_strict_subsolution_positive_slack(self):
        report = gronwall_check(lambda t: 0.5 * math.exp(t), 0.0, 1.0, 1e-3,
                                a=1.0, c=1.0)
        assert report.min_slack > 0.0
        assert report.passed

    def test_premise_violation_raises(self):
        with pytest.raises(PremiseError):
            gronwall_check(lambda t: math.exp(3.0 * t), 0.0, 1.0, 1e-3, a=1.0, c=1.0)

    def test_round_down_integrand(self):
        from emholder.grids import make_uniform
        # x constant: the round-down integrand changes nothing
        report = gronwall_check(lambda t: 1.0, 0.0, 1.0, 1e-3, a=1.0, c=1.0,
                                delta=make_uniform(4, 1.0))
        assert isinstance(report, GronwallReport)
        assert report.passed

    def test_lp_variant_constant(self):
        report = gronwall_lp_check(lambda t: 1.0, lambda t: 1.0, 1.0, 2.0,
                                   0.0, 1.0, 1e-3)
        assert report.passed

    def test_lp_variant_conclusion_formula(self):
        # sub-solution x == a == 1: bound is 2^{1-1/p} exp(2^{p-1} c^p t / p),
        # tightest at t = 0 where it equals 2^{1-1/p}
        p, c = 2.0, 0.7
        report = gronwall_lp_check(lambda t: 1.0, lambda t: 1.0, c, p, 0.0, 1.0, 1e-3)
        assert report.min_slack == pytest.approx(2.0 ** 0.5 - 1.0, rel=1e-12)
        assert report.conclusion_excess == pytest.approx(1.0 - 2.0 ** 0.5, rel=1e-12)

    def test_lp_premise_violation(self):
        with pytest.raises(PremiseError):
            gronwall_lp_check(lambda t: math.exp(5.0 * t), lambda t: 1.0, 1.0, 2.0,
                              0.0, 1.0, 1e-3)


class TestLyapunovCheck:
    def test_random_sweep_no_violations(self):
        spec = LyapunovSpec(q=2.0, a=1.0, c=1.0)
        rng = np.random.default_rng(0)
        xs = rng.normal(size=(1000, 5))
        ys = rng.normal(size=(1000, 5))
        zs = rng.normal(size=(1000, 5))
        report = lyapunov_check(spec, xs, ys, zs)
        assert report.passed
        assert report.max_fd_rel_error <= 1e-5

    def test_gradient_vanishes_at_origin(self):
        spec = LyapunovSpec(q=2.0, a=1.0, c=1.0)
        assert spec.dv(np.zeros((1, 3)), np.ones((1, 3)))[0] == 0.0

    def test_zero_direction(self):
        spec = LyapunovSpec(q=2.0, a=1.0, c=1.0)
        report = lyapunov_check(spec, np.ones((4, 3)), np.zeros((4, 3)),
                                np.ones((4, 3)))
        assert report.max_gradient_ratio == 0.0
        assert report.passed


class TestSecondOrderCheck:
    def test_degenerate_quadruples(self):
        f = builtin("arctan_tan").mu
        v = np.random.default_rng(0).normal(size=(16, 1))
        report = second_order_check(f, v, v.copy(), v, v.copy(), 1.0, 3.0)
        assert report.max_ratio == 0.0

    def test_linear_map_reduces_to_lipschitz_equality(self):
        def f(x):
            return 3.0 * x

        rng = np.random.default_rng(1)
        v1 = rng.normal(size=(64, 2))
        v2 = rng.normal(size=(64, 2))
        w1 = v1 + 0.5
        w2 = v2 - 0.25
        report = second_order_check(f, v1, v2, w1, w2, 3.0, 0.0)
        assert report.violations == 0
        assert report.max_ratio == pytest.approx(1.0, abs=1e-9)

    def test_arctan_drift_sweep(self):
        from emholder.models import estimate_derivative_sups
        model = builtin("arctan_tan")
        sup_df, sup_d2f = estimate_derivative_sups(
            lambda v: -np.sin(v) * np.cos(v) ** 3)
        rng = np.random.default_rng(2)
        quads = rng.uniform(-2.0, 2.0, size=(10 ** 4, 4, 1))
        report = second_order_check(model.mu, quads[:, 0], quads[:, 1],
                                    quads[:, 2], quads[:, 3], sup_df, sup_d2f)
        assert report.passed
