"""Coefficient models, the built-in catalog, Lyapunov specs and the
numeric check of the second-order spatial regularity condition.

A model bundles drift/diffusion evaluators with the two regularity
constants used everywhere downstream:

* ``lipschitz_c`` -- a bound on the first-derivative suprema of mu and
  sigma (the constant multiplying the difference-of-differences term);
* ``second_order_b`` -- a bound on the second-derivative suprema (the
  constant multiplying the mixed product term).

Built-in constants are stored closed-form; parsed user models estimate
them by dense 1-d grid search over finite-difference derivative
magnitudes.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import expr as expr_mod

__all__ = [
    "CoefficientModel", "LyapunovSpec", "ConditionReport",
    "builtin", "default_lyapunov", "verify_condition", "model_from_json",
    "estimate_derivative_sups",
]

# sup|mu''| for mu(x) = -sin(x)cos^3(x): max of |sin(2x)+2sin(4x)|, attained
# at cos(2x) = (sqrt(129)-1)/16; rounded up in the last digit.
_ARCTAN_B = 2.7358151040642215

_TAN_CLAMP = 1e12
_TAN_SAFE_MARGIN = math.pi / 2 - 1e-6


@dataclass(frozen=True)
class CoefficientModel:
    """Drift/diffusion pair with dimensions, constants and exact solution.

    ``mu`` maps states of shape (..., d) to (..., d); ``sigma`` maps
    (..., d) to (..., d, m).  ``exact_kind`` is one of
    {"none", "arctan_tan", "gbm", "constant"}; when not "none",
    :meth:`exact_state` maps a start point and a Brownian displacement to
    the pathwise solution value.
    """

    name: str
    d: int
    m: int
    mu: Callable[[np.ndarray], np.ndarray]
    sigma: Callable[[np.ndarray], np.ndarray]
    lipschitz_c: float
    second_order_b: float
    exact_kind: str = "none"
    exact_params: dict = field(default_factory=dict)

    def exact_state(self, x0: np.ndarray, w: np.ndarray, t) -> np.ndarray:
        """Closed-form solution value at elapsed time(s) t.

        ``x0`` has shape (..., d); ``w`` is the Brownian displacement since
        the start, shape (..., m); ``t`` is the elapsed time (scalar or
        broadcastable).  Only defined for exact_kind != "none".
        """
        from .exceptions import ExactSolutionUnavailable

        x0 = np.asarray(x0, dtype=np.float64)
        w = np.asarray(w, dtype=np.float64)
        if self.exact_kind == "arctan_tan":
            return np.arctan(w[..., :1] + _safe_tan(x0))
        if self.exact_kind == "gbm":
            lam = self.exact_params["lam"]
            xi = self.exact_params["xi"]
            drift = (lam - 0.5 * xi * xi) * np.asarray(t, dtype=np.float64)
            return x0 * np.exp(np.expand_dims(drift, -1) + xi * w[..., :1])
        if self.exact_kind == "constant":
            mu0 = self.exact_params["mu0"]
            sigma0 = self.exact_params["sigma0"]
            tt = np.expand_dims(np.asarray(t, dtype=np.float64), -1)
            return x0 + mu0 * tt + sigma0 * w[..., :1]
        raise ExactSolutionUnavailable(f"model {self.name!r} has no closed-form solution")

    @property
    def has_exact(self) -> bool:
        return self.exact_kind != "none"


def _safe_tan(x: np.ndarray) -> np.ndarray:
    """tan(x) clamped to +-1e12, warning when x is too close to a pole."""
    folded = np.abs(np.remainder(x + math.pi / 2, math.pi) - math.pi / 2)
    if np.any(folded > _TAN_SAFE_MARGIN):
        warnings.warn("tan(x) evaluated within 1e-6 of a pole; value clamped at 1e12",
                      RuntimeWarning, stacklevel=3)
    return np.clip(np.tan(x), -_TAN_CLAMP, _TAN_CLAMP)


def _as_state(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


def builtin(name: str, **params) -> CoefficientModel:
    """Built-in catalog: "arctan_tan", "gbm" (lam, xi), "constant" (mu0, sigma0)."""
    if name == "arctan_tan":
        def mu(x):
            x = _as_state(x)
            return -np.sin(x) * np.cos(x) ** 3

        def sigma(x):
            x = _as_state(x)
            return (np.cos(x) ** 2)[..., np.newaxis]

        return CoefficientModel(name="arctan_tan", d=1, m=1, mu=mu, sigma=sigma,
                                lipschitz_c=1.0, second_order_b=_ARCTAN_B,
                                exact_kind="arctan_tan")
    if name == "gbm":
        lam = float(params["lam"])
        xi = float(params["xi"])

        def mu(x):
            return lam * _as_state(x)

        def sigma(x):
            return (xi * _as_state(x))[..., np.newaxis]

        return CoefficientModel(name=f"gbm({lam};{xi})", d=1, m=1, mu=mu, sigma=sigma,
                                lipschitz_c=max(abs(lam), abs(xi)), second_order_b=0.0,
                                exact_kind="gbm", exact_params={"lam": lam, "xi": xi})
    if name == "constant":
        mu0 = float(params["mu0"])
        sigma0 = float(params["sigma0"])

        def mu(x):
            x = _as_state(x)
            return np.full_like(x, mu0)

        def sigma(x):
            x = _as_state(x)
            return np.full_like(x, sigma0)[..., np.newaxis]

        return CoefficientModel(name=f"constant({mu0};{sigma0})", d=1, m=1, mu=mu,
                                sigma=sigma, lipschitz_c=0.0, second_order_b=0.0,
                                exact_kind="constant",
                                exact_params={"mu0": mu0, "sigma0": sigma0})
    raise ValueError(f"unknown builtin model {name!r}")


def estimate_derivative_sups(fn: Callable[[np.ndarray], np.ndarray],
                             lo: float = -2.0 * math.pi, hi: float = 2.0 * math.pi,
                             points: int = 200001, h: float = 1e-5) -> tuple[float, float]:
    """Grid-searched (sup|f'|, sup|f''|) of a scalar function via central differences."""
    grid = np.linspace(lo, hi, points)
    f0 = np.asarray(fn(grid), dtype=np.float64).reshape(grid.shape)
    fp = np.asarray(fn(grid + h), dtype=np.float64).reshape(grid.shape)
    fm = np.asarray(fn(grid - h), dtype=np.float64).reshape(grid.shape)
    d1 = np.abs(fp - fm) / (2.0 * h)
    d2 = np.abs(fp - 2.0 * f0 + fm) / (h * h)
    return float(d1.max()), float(d2.max())


def model_from_json(source: str | dict) -> CoefficientModel:
    """Model from a JSON config: {"builtin": name, ...} or {"expr": {"mu": ..., "sigma": ...}}."""
    data = json.loads(source) if isinstance(source, str) else source
    if "builtin" in data:
        params = {k: v for k, v in data.items() if k != "builtin"}
        return builtin(data["builtin"], **params)
    if "expr" in data:
        mu_ast = expr_mod.parse(data["expr"]["mu"])
        sigma_ast = expr_mod.parse(data["expr"]["sigma"])

        def mu(x):
            x = _as_state(x)
            return np.asarray(expr_mod.evaluate(mu_ast, x[..., 0]))[..., np.newaxis]

        def sigma(x):
            x = _as_state(x)
            return np.asarray(expr_mod.evaluate(sigma_ast, x[..., 0]))[..., np.newaxis, np.newaxis]

        c_mu, b_mu = estimate_derivative_sups(lambda v: expr_mod.evaluate(mu_ast, v))
        c_sg, b_sg = estimate_derivative_sups(lambda v: expr_mod.evaluate(sigma_ast, v))
        return CoefficientModel(name="expr", d=1, m=1, mu=mu, sigma=sigma,
                                lipschitz_c=max(c_mu, c_sg),
                                second_order_b=max(b_mu, b_sg))
    raise ValueError("model config needs a 'builtin' or 'expr' entry")


@dataclass(frozen=True)
class LyapunovSpec:
    """Polynomial Lyapunov function V(x) = (a + c^2 ||x||^2)^q with evaluators.

    ``moment_order`` is the L^p order this function controls moments for
    (None for a raw polynomial form).  The derivative bounds hold
    with constants ``grad_const = 2qc`` (exponent (2q-1)/(2q)) and
    ``hess_const = 2q(2q-1)c^2`` (exponent (q-1)/q); ``cbar`` rounds both up
    to the single growth constant used by the moment bound.
    """

    q: float
    a: float
    c: float
    moment_order: float | None = None

    def __post_init__(self):
        if self.q < 1.0:
            raise ValueError("q must be >= 1")
        if self.a < 0.0 or self.c < 0.0:
            raise ValueError("a and c must be nonnegative")

    @property
    def grad_const(self) -> float:
        return 2.0 * self.q * self.c

    @property
    def hess_const(self) -> float:
        return 2.0 * self.q * (2.0 * self.q - 1.0) * self.c ** 2

    @property
    def cbar(self) -> float:
        """Growth constant dominating both derivative bounds.

        For moment specs this is the rounded-up value max{2pc, 4p^2 c^2}
        (in model-constant terms) that the moment bound is quoted with;
        written in polynomial-form parameters it is max(u, u^2) with u = p*c.
        """
        if self.moment_order is not None:
            u = self.moment_order * self.c
            return max(u, u * u)
        return max(self.grad_const, self.hess_const)

    def value(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        g = self.a + self.c ** 2 * np.sum(x * x, axis=-1)
        return g ** self.q

    def dv(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Directional first derivative (DV)(x)(y)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        g = self.a + self.c ** 2 * np.sum(x * x, axis=-1)
        return self.q * g ** (self.q - 1.0) * 2.0 * self.c ** 2 * np.sum(x * y, axis=-1)

    def d2v(self, x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Directional second derivative (D^2 V)(x)(y, z)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        z = np.asarray(z, dtype=np.float64)
        g = self.a + self.c ** 2 * np.sum(x * x, axis=-1)
        xy = np.sum(x * y, axis=-1)
        xz = np.sum(x * z, axis=-1)
        yz = np.sum(y * z, axis=-1)
        first = self.q * (self.q - 1.0) * g ** (self.q - 2.0) * 4.0 * self.c ** 4 * xz * xy
        second = 2.0 * self.q * self.c ** 2 * g ** (self.q - 1.0) * yz
        return first + second


def default_lyapunov(model: CoefficientModel, p: float) -> LyapunovSpec:
    """The moment-bound Lyapunov function 2^p (1 + (||mu(0)||+||sigma(0)||)^2 + c^2||x||^2)^{p/2}.

    Equals the polynomial form with q = p/2, a = 4(1 + (||mu(0)||+||sigma(0)||)^2)
    and scale 2c, so the derivative bounds come with constants 2pc and
    4p(p-1)c^2 and the growth constant is cbar = max(2pc, 4p^2 c^2).
    """
    if p < 2.0:
        raise ValueError("moment order p must be >= 2")
    zero = np.zeros((1, model.d))
    base = float(np.linalg.norm(model.mu(zero)[0]) + np.linalg.norm(model.sigma(zero)[0]))
    c = model.lipschitz_c
    return LyapunovSpec(q=p / 2.0, a=4.0 * (1.0 + base * base), c=2.0 * c, moment_order=p)


def growth_cbar(model: CoefficientModel, p: float) -> float:
    """The moment growth constant max{2pc, 4 p^2 c^2} for the default Lyapunov function."""
    c = model.lipschitz_c
    return max(2.0 * p * c, 4.0 * p * p * c * c)


@dataclass(frozen=True)
class ConditionReport:
    """Result of the numeric second-order condition check."""

    max_ratio: float
    worst: tuple
    trials: int
    violations: int
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def verify_condition(model: CoefficientModel, trials: int = 10000, seed: int = 0,
                     sampler: Callable[[np.random.Generator, int], np.ndarray] | None = None,
                     tolerance: float = 1e-9) -> ConditionReport:
    """Sample quadruples and compare both sides of the regularity condition.

    For each quadruple (x, y, xt, yt) the left side is
    ``max_zeta ||(zeta(x)-zeta(y)) - (zeta(xt)-zeta(yt))||`` and the right
    side is ``c ||(x-y)-(xt-yt)|| + b (||x-y||+||xt-yt||)/2 ||x-xt||``.
    Reports the maximum ratio and the count of ratios above 1 + tolerance.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    if sampler is None:
        quads = rng.uniform(-2.0, 2.0, size=(trials, 4, model.d))
    else:
        quads = np.asarray(sampler(rng, trials), dtype=np.float64)
        if quads.shape != (trials, 4, model.d):
            raise ValueError(f"sampler must return shape {(trials, 4, model.d)}")
    x, y, xt, yt = quads[:, 0], quads[:, 1], quads[:, 2], quads[:, 3]

    def frob(arr):
        return np.sqrt(np.sum(arr * arr, axis=tuple(range(1, arr.ndim))))

    lhs_mu = frob((model.mu(x) - model.mu(y)) - (model.mu(xt) - model.mu(yt)))
    lhs_sigma = frob((model.sigma(x) - model.sigma(y)) - (model.sigma(xt) - model.sigma(yt)))
    lhs = np.maximum(lhs_mu, lhs_sigma)
    rhs = (model.lipschitz_c * frob((x - y) - (xt - yt))
           + model.second_order_b * 0.5 * (frob(x - y) + frob(xt - yt)) * frob(x - xt))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(lhs == 0.0, 0.0, lhs / rhs)
    worst_i = int(np.argmax(ratios))
    violations = int(np.count_nonzero(ratios > 1.0 + tolerance))
    return ConditionReport(max_ratio=float(ratios[worst_i]),
                           worst=(x[worst_i], y[worst_i], xt[worst_i], yt[worst_i]),
                           trials=trials, violations=violations, tolerance=tolerance)
