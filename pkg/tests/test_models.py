import math

import numpy as np
import pytest

from emholder.estimators import gauss_hermite_mean, identity_functional
from emholder.exceptions import ExactSolutionUnavailable
from emholder.models import (LyapunovSpec, builtin, default_lyapunov,
                             estimate_derivative_sups, model_from_json,
                             verify_condition)


class TestBuiltins:
    def test_arctan_tan_at_origin(self):
        m = builtin("arctan_tan")
        assert m.mu(np.array([[0.0]]))[0, 0] == 0.0
        assert m.sigma(np.array([[0.0]]))[0, 0, 0] == 1.0

    def test_degenerate_constant_is_frozen(self):
        m = builtin("constant", mu0=0.0, sigma0=0.0)
        x = np.array([[1.3]])
        w = np.array([[0.7]])
        assert m.exact_state(x, w, 0.9)[0, 0] == 1.3

    def test_gbm_closed_form_at_zero_noise(self):
        m = builtin("gbm", lam=0.05, xi=0.2)
        x = np.array([[2.0]])
        got = m.exact_state(x, np.array([[0.0]]), 1.0)[0, 0]
        assert got == pytest.approx(2.0 * math.exp(0.03), rel=1e-15)

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            builtin("heston")

    def test_exact_unavailable(self):
        model = model_from_json({"expr": {"mu": "0", "sigma": "1"}})
        with pytest.raises(ExactSolutionUnavailable):
            model.exact_state(np.array([[0.0]]), np.array([[0.0]]), 1.0)

    def test_tan_pole_clamped_with_warning(self):
        import math
        import warnings

        m = builtin("arctan_tan")
        near_pole = np.array([[math.pi / 2 - 1e-9]])
        with pytest.warns(RuntimeWarning):
            value = m.exact_state(near_pole, np.array([[0.0]]), 1.0)
        assert np.all(np.isfinite(value))
        # starts away from the poles stay silent
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            m.exact_state(np.array([[1.0]]), np.array([[0.5]]), 1.0)

    def test_stored_constants_match_grid_search(self):
        m = builtin("arctan_tan")
        c_mu, b_mu = estimate_derivative_sups(lambda v: -np.sin(v) * np.cos(v) ** 3)
        c_sg, b_sg = estimate_derivative_sups(lambda v: np.cos(v) ** 2)
        assert max(c_mu, c_sg) == pytest.approx(m.lipschitz_c, abs=1e-6)
        assert max(b_mu, b_sg) == pytest.approx(m.second_order_b, abs=1e-5)

    def test_expr_model_evaluates(self):
        model = model_from_json(
            '{"expr": {"mu": "-sin(x)*cos(x)^3", "sigma": "cos(x)^2"}}')
        ref = builtin("arctan_tan")
        xs = np.linspace(-1.0, 1.0, 9).reshape(-1, 1)
        assert np.allclose(model.mu(xs), ref.mu(xs), rtol=0, atol=0)
        assert np.allclose(model.sigma(xs), ref.sigma(xs), rtol=0, atol=0)
        assert 0.99 < model.lipschitz_c < 1.01


class TestLyapunov:
    def test_value_at_origin_dominates_one(self):
        for p in (2.0, 4.0, 6.0):
            spec = default_lyapunov(builtin("arctan_tan"), p)
            v0 = float(spec.value(np.array([0.0])))
            assert v0 >= 2.0 ** p >= 1.0

    def test_arctan_p2_origin_value(self):
        spec = default_lyapunov(builtin("arctan_tan"), 2.0)
        assert float(spec.value(np.array([0.0]))) == pytest.approx(8.0, rel=1e-15)

    def test_linear_growth_dominated(self):
        model = builtin("arctan_tan")
        p = 4.0
        spec = default_lyapunov(model, p)
        zero = np.zeros((1, 1))
        base = float(np.linalg.norm(model.mu(zero)) + np.linalg.norm(model.sigma(zero)))
        rng = np.random.default_rng(1)
        xs = rng.normal(scale=3.0, size=(100, 1))
        lhs = base + model.lipschitz_c * np.abs(xs[:, 0])
        rhs = spec.value(xs) ** (1.0 / p)
        assert np.all(lhs <= rhs + 1e-12)

    def test_requires_p_at_least_two(self):
        with pytest.raises(ValueError):
            default_lyapunov(builtin("arctan_tan"), 1.5)

    def test_cbar_rounds_up_both_constants(self):
        spec = default_lyapunov(builtin("arctan_tan"), 4.0)
        c = builtin("arctan_tan").lipschitz_c
        assert spec.cbar == max(2 * 4.0 * c, 4 * 4.0 ** 2 * c ** 2)

    def test_first_order_taylor_remainder_quadratic(self):
        # |V(x+hu) - V(x) - h DV(x)(u)| <= K h^2 with K from the Hessian bound
        spec = LyapunovSpec(q=2.0, a=1.0, c=1.0)
        rng = np.random.default_rng(7)
        xs = rng.normal(size=(50, 3))
        us = rng.normal(size=(50, 3))
        for h in (1e-3, 1e-4):
            lhs = np.abs(spec.value(xs + h * us) - spec.value(xs) - h * spec.dv(xs, us))
            # Hessian bound along the segment, padded for the h-ball
            seg = np.abs(spec.d2v(xs, us, us)) + np.abs(spec.d2v(xs + h * us, us, us))
            assert np.all(lhs <= seg * h * h)


class TestVerifyCondition:
    def test_linear_model_within_lipschitz_budget(self):
        report = verify_condition(builtin("gbm", lam=0.05, xi=0.2), trials=10000, seed=3)
        assert report.violations == 0
        assert report.max_ratio <= 1.0 + 1e-9

    def test_degenerate_quadruple_ratio_zero(self):
        model = builtin("arctan_tan")

        def sampler(rng, trials):
            x = rng.uniform(-1, 1, size=(trials, 1))
            return np.stack([x, x, x, x], axis=1)

        report = verify_condition(model, trials=64, seed=0, sampler=sampler)
        assert report.max_ratio == 0.0

    def test_arctan_tan_with_grid_searched_sups(self):
        report = verify_condition(builtin("arctan_tan"), trials=10000, seed=11)
        assert report.violations == 0
        assert report.max_ratio <= 1.0 + 1e-9


class TestEulerConsistency:
    @pytest.mark.parametrize("name,params,x", [
        ("arctan_tan", {}, 0.7),
        ("gbm", {"lam": 0.05, "xi": 0.2}, 1.0),
    ])
    def test_one_step_l2_error_is_first_order(self, name, params, x):
        # one-step strong error err(dt) ~ C dt: halving dt halves it (+-20%)
        model = builtin(name, **params)

        def one_step_l2(dt: float) -> float:
            z, w = np.polynomial.hermite.hermgauss(160)
            disp = (math.sqrt(2.0 * dt) * z)[:, np.newaxis]
            x0 = np.full((z.size, 1), x)
            exact = model.exact_state(x0, disp, dt)[:, 0]
            euler = (x + model.mu(np.array([[x]]))[0, 0] * dt
                     + model.sigma(np.array([[x]]))[0, 0, 0] * disp[:, 0])
            return math.sqrt(np.sum(w * (exact - euler) ** 2) / math.sqrt(math.pi))

        ratio = one_step_l2(1e-3) / one_step_l2(5e-4)
        assert 1.6 <= ratio <= 2.4


class TestOracleSanity:
    def test_gauss_hermite_identity_matches_symmetry(self):
        # arctan is odd and the displacement is symmetric: mean 0 at x = 0
        val = gauss_hermite_mean(builtin("arctan_tan"), identity_functional, 0.0, 1.0)
        assert abs(val) < 1e-15
