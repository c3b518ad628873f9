"""Closed-form error bounds with explicit constants, plus numeric verifiers
for Gronwall-type inequalities, the polynomial Lyapunov derivative bounds and the
second-order difference inequality.

Conventions: the product 0 * inf is 0 (so an infinite second-order constant
``b`` yields a trivial bound only when its geometric factor is nonzero);
norms are Euclidean/Frobenius throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grids import Partition, round_down
from .models import CoefficientModel, LyapunovSpec, default_lyapunov

__all__ = [
    "BoundParams", "bound_moment", "bound_strong_error", "bound_time_space",
    "bound_spatial_time", "bound_four_point", "bound_full",
    "GronwallReport", "gronwall_check", "gronwall_lp_check",
    "LyapunovReport", "lyapunov_check",
    "SecondOrderReport", "second_order_check",
]


@dataclass(frozen=True)
class BoundParams:
    """Constants feeding the closed-form bounds.

    ``b`` may be ``math.inf`` (the merely-Lipschitz case); the bounds that
    multiply ``b`` then return inf unless the geometric factor vanishes.
    """

    T: float
    c: float
    cbar: float
    b: float
    p: float
    lyapunov: LyapunovSpec

    def __post_init__(self):
        if not self.T > 0.0:
            raise ValueError("T must be positive")
        if self.p < 2.0:
            raise ValueError("p must be >= 2")
        if self.c < 0.0 or self.cbar < 0.0 or self.b < 0.0:
            raise ValueError("constants must be nonnegative")

    @staticmethod
    def from_model(model: CoefficientModel, p: float, horizon: float) -> "BoundParams":
        lyap = default_lyapunov(model, p)
        return BoundParams(T=horizon, c=model.lipschitz_c, cbar=lyap.cbar,
                           b=model.second_order_b, p=p, lyapunov=lyap)

    @property
    def bracket(self) -> float:
        """sqrt(T) + p, the Burkholder-Davis-Gundy factor."""
        return math.sqrt(self.T) + self.p

    def exp_growth(self, multiple: float) -> float:
        """exp(multiple * c^2 (sqrt(T)+p)^2 T)."""
        return math.exp(multiple * self.c ** 2 * self.bracket ** 2 * self.T)

    def v_power(self, x, power: float) -> float:
        return float(self.lyapunov.value(np.atleast_1d(np.asarray(x, dtype=np.float64)))) ** power


def _norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v, dtype=np.float64)))


def _zero_inf_product(coefficient: float, factor: float) -> float:
    """coefficient * factor with the 0*inf = 0 convention on the factor."""
    if factor == 0.0:
        return 0.0
    return coefficient * factor


def bound_moment(params: BoundParams, x, s: float, t: float) -> float:
    """Moment growth: exp(1.5 cbar |t-s|) V(x)."""
    _check_times(params, s, t)
    return math.exp(1.5 * params.cbar * abs(t - s)) * params.v_power(x, 1.0)


def bound_strong_error(params: BoundParams, x, s: float, t: float, mesh: float) -> float:
    """Exact-vs-scheme distance: sqrt2 c B^2 e^{c^2 B^2 T} (e^{1.5 cbar T} V)^{1/p}
    |t-s|^{1/2} mesh^{1/2}."""
    _check_times(params, s, t)
    if mesh < 0.0:
        raise ValueError("mesh must be nonnegative")
    B = params.bracket
    v_term = (math.exp(1.5 * params.cbar * params.T) * params.v_power(x, 1.0)) ** (1.0 / params.p)
    return (math.sqrt(2.0) * params.c * B ** 2 * params.exp_growth(1.0)
            * v_term * math.sqrt(abs(t - s)) * math.sqrt(mesh))


def bound_time_space(params: BoundParams, x, xt, s: float, st: float,
                     t: float, tt: float) -> float:
    """Start-to-start distance: sqrt2 ||x-xt|| e^{c^2 B^2 T}
    + 5 e^{c^2 B^2 T} B e^{1.5 cbar T / p} avgV^{1/p} (|s-st|^{1/2}+|t-tt|^{1/2})."""
    B = params.bracket
    avg_v = 0.5 * (params.v_power(x, 1.0 / params.p) + params.v_power(xt, 1.0 / params.p))
    first = math.sqrt(2.0) * _norm(np.subtract(x, xt)) * params.exp_growth(1.0)
    second = (5.0 * params.exp_growth(1.0) * B
              * math.exp(1.5 * params.cbar * params.T / params.p) * avg_v
              * (math.sqrt(abs(s - st)) + math.sqrt(abs(t - tt))))
    return first + second


def bound_spatial_time(params: BoundParams, x, xt, t: float, tt: float) -> float:
    """Mixed increment: c B sqrt2 e^{c^2 B^2 T} ||x-xt|| |t-tt|^{1/2}."""
    B = params.bracket
    return (params.c * B * math.sqrt(2.0) * params.exp_growth(1.0)
            * _norm(np.subtract(x, xt)) * math.sqrt(abs(t - tt)))


def bound_four_point(params: BoundParams, x, xt, y, yt, s: float, t: float,
                     mesh: float) -> float:
    """Spatial difference of scheme errors at one time (order p/2 norm, p >= 4)."""
    if params.p < 4.0:
        raise ValueError("the four-point bound requires p >= 4")
    _check_times(params, s, t)
    B = params.bracket
    avg_v = 0.5 * (params.v_power(x, 1.0 / params.p) + params.v_power(xt, 1.0 / params.p))
    first = (math.sqrt(2.0) * params.exp_growth(1.0)
             * _norm(np.subtract(np.subtract(x, y), np.subtract(xt, yt))))
    second = _zero_inf_product(
        2.0 * math.sqrt(2.0) * (params.c ** 2 + params.b * params.c + params.b)
        * B ** 4 * params.exp_growth(3.0)
        * math.exp(1.5 * params.cbar * params.T / params.p) * avg_v,
        math.sqrt(mesh) * _norm(np.subtract(x, xt)) * math.sqrt(abs(t - s)))
    third = _zero_inf_product(
        2.0 * math.sqrt(2.0) * params.b * B * params.exp_growth(3.0),
        0.5 * (_norm(np.subtract(x, y)) + _norm(np.subtract(xt, yt)))
        * _norm(np.subtract(x, xt)) * math.sqrt(abs(t - s)))
    return first + second + third


def bound_full(params: BoundParams, x, xt, s: float, st: float, t: float,
               tt: float, mesh: float) -> float:
    """Full temporal-spatial difference of scheme errors (order p/2, p >= 4):
    31 (b+c)(c+1) B^6 e^{5 c^2 B^2 T} e^{4.5 cbar T / p} avgV^{2/p}
    [|s-st|^{1/2} + |t-tt|^{1/2} + ||x-xt||] mesh^{1/2}."""
    if params.p < 4.0:
        raise ValueError("the full bound requires p >= 4")
    B = params.bracket
    avg_v = 0.5 * (params.v_power(x, 2.0 / params.p) + params.v_power(xt, 2.0 / params.p))
    geometry = ((math.sqrt(abs(s - st)) + math.sqrt(abs(t - tt))
                 + _norm(np.subtract(x, xt))) * math.sqrt(mesh))
    coefficient = (31.0 * (params.b + params.c) * (params.c + 1.0) * B ** 6
                   * params.exp_growth(5.0)
                   * math.exp(4.5 * params.cbar * params.T / params.p) * avg_v)
    return _zero_inf_product(coefficient, geometry)


def _check_times(params: BoundParams, s: float, t: float):
    if not (0.0 <= s <= t <= params.T):
        raise ValueError(f"need 0 <= s <= t <= T, got s={s!r}, t={t!r}, T={params.T!r}")


# ---------------------------------------------------------------------------
# Gronwall verifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GronwallReport:
    """Pointwise verification result of a Gronwall-type conclusion."""

    premise_residual: float       # max over grid of x(t) - (premise RHS)
    conclusion_excess: float      # max over grid of x(t) - (conclusion bound)
    min_slack: float              # min over grid of (conclusion bound) - x(t)
    tolerance: float
    grid_step: float

    @property
    def passed(self) -> bool:
        return self.conclusion_excess <= self.tolerance


def _round_down_map(delta: Partition | None):
    if delta is None:
        return lambda t: t
    return lambda t: round_down(delta, t)


def gronwall_check(x: Callable[[float], float], t0: float, horizon: float,
                   step: float, a: float, c: float, *, delta: Partition | None = None,
                   tolerance: float = 1e-9, premise_tolerance: float = 1e-4) -> GronwallReport:
    """Verify x(t) <= a e^{c (t - t0)} given the round-down integral premise.

    The premise ``x(t) <= a + int_{t0}^t c x(delta(s)) ds`` is checked with a
    left-Riemann sum (mirroring the round-down structure of the integrand);
    a residual above ``premise_tolerance`` raises PremiseError.  The report
    carries the worst conclusion excess and slack.
    """
    from .exceptions import PremiseError

    times = _uniform_times(t0, horizon, step)
    xs = np.array([float(x(t)) for t in times])
    rd = _round_down_map(delta)
    x_rd = np.array([float(x(rd(t))) for t in times])

    integral = np.concatenate([[0.0], np.cumsum(c * x_rd[:-1] * np.diff(times))])
    premise_resid = xs - (a + integral)
    worst = float(np.max(premise_resid))
    if worst > premise_tolerance:
        where = float(times[int(np.argmax(premise_resid))])
        raise PremiseError(
            f"integral premise violated by {worst:.3e} > {premise_tolerance:.3e}", where)

    bound = a * np.exp(c * (times - t0))
    excess = xs - bound
    return GronwallReport(premise_residual=worst,
                          conclusion_excess=float(np.max(excess)),
                          min_slack=float(np.min(-excess)),
                          tolerance=tolerance, grid_step=step)


def gronwall_lp_check(x: Callable[[float], float], a: Callable[[float], float],
                      c: float, p: float, t0: float, horizon: float, step: float,
                      *, delta: Partition | None = None, tolerance: float = 1e-9,
                      premise_tolerance: float = 1e-4) -> GronwallReport:
    """Verify the L^p variant: premise x(t) <= a(t) + (int |c x(delta(s))|^p ds)^{1/p},
    conclusion x(t) <= 2^{1-1/p} sup_{s<=t} a(s) exp(2^{p-1} c^p (t-t0) / p)."""
    from .exceptions import PremiseError

    if p < 1.0:
        raise ValueError("p must be >= 1")
    times = _uniform_times(t0, horizon, step)
    xs = np.array([float(x(t)) for t in times])
    a_vals = np.array([float(a(t)) for t in times])
    rd = _round_down_map(delta)
    x_rd = np.array([float(x(rd(t))) for t in times])

    integral = np.concatenate([[0.0], np.cumsum(np.abs(c * x_rd[:-1]) ** p * np.diff(times))])
    premise_rhs = a_vals + integral ** (1.0 / p)
    premise_resid = xs - premise_rhs
    worst = float(np.max(premise_resid))
    if worst > premise_tolerance:
        where = float(times[int(np.argmax(premise_resid))])
        raise PremiseError(
            f"L^p integral premise violated by {worst:.3e} > {premise_tolerance:.3e}", where)

    running_sup_a = np.maximum.accumulate(a_vals)
    bound = (2.0 ** (1.0 - 1.0 / p) * running_sup_a
             * np.exp(2.0 ** (p - 1.0) * c ** p * (times - t0) / p))
    excess = xs - bound
    return GronwallReport(premise_residual=worst,
                          conclusion_excess=float(np.max(excess)),
                          min_slack=float(np.min(-excess)),
                          tolerance=tolerance, grid_step=step)


def _uniform_times(t0: float, horizon: float, step: float) -> np.ndarray:
    if not horizon > t0:
        raise ValueError("horizon must exceed t0")
    if not 0.0 < step <= horizon - t0:
        raise ValueError("invalid grid step")
    count = int(round((horizon - t0) / step))
    return t0 + np.arange(count + 1) * step


# ---------------------------------------------------------------------------
# Lyapunov derivative bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LyapunovReport:
    gradient_violations: int
    hessian_violations: int
    max_gradient_ratio: float
    max_hessian_ratio: float
    max_fd_rel_error: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.gradient_violations == 0 and self.hessian_violations == 0


def lyapunov_check(spec: LyapunovSpec, xs: np.ndarray, ys: np.ndarray,
                   zs: np.ndarray, *, tolerance: float = 1e-9,
                   fd_step: float = 1e-4, fd_rel_tol: float = 1e-5) -> LyapunovReport:
    """Check both derivative bounds of the polynomial Lyapunov function and
    validate the closed-form evaluators against central finite differences.

    Bounds checked at each sample (x, y, z):
        |DV(x)(y)|    <= grad_const V(x)^{(2q-1)/(2q)} ||y||
        |D2V(x)(y,z)| <= hess_const V(x)^{(q-1)/q} ||y|| ||z||
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
    ys = np.atleast_2d(np.asarray(ys, dtype=np.float64))
    zs = np.atleast_2d(np.asarray(zs, dtype=np.float64))
    v = spec.value(xs)
    ny = np.linalg.norm(ys, axis=-1)
    nz = np.linalg.norm(zs, axis=-1)
    q = spec.q

    dv = spec.dv(xs, ys)
    grad_rhs = spec.grad_const * v ** ((2.0 * q - 1.0) / (2.0 * q)) * ny
    with np.errstate(invalid="ignore", divide="ignore"):
        grad_ratio = np.where(np.abs(dv) == 0.0, 0.0, np.abs(dv) / grad_rhs)

    d2v = spec.d2v(xs, ys, zs)
    hess_rhs = spec.hess_const * v ** ((q - 1.0) / q) * ny * nz
    with np.errstate(invalid="ignore", divide="ignore"):
        hess_ratio = np.where(np.abs(d2v) == 0.0, 0.0, np.abs(d2v) / hess_rhs)

    # central-difference validation of the evaluators along y
    scale = fd_step * np.maximum(1.0, np.linalg.norm(xs, axis=-1, keepdims=True))
    unit = ys / np.maximum(ny, 1e-300)[..., np.newaxis]
    vp = spec.value(xs + scale * unit)
    vm = spec.value(xs - scale * unit)
    h = scale[..., 0]
    fd_dv = (vp - vm) / (2.0 * h)
    an_dv = spec.dv(xs, unit)
    fd_d2 = (vp - 2.0 * v + vm) / (h * h)
    an_d2 = spec.d2v(xs, unit, unit)
    denom1 = np.maximum(np.abs(an_dv), 1e-6 * np.maximum(np.abs(v), 1.0))
    denom2 = np.maximum(np.abs(an_d2), 1e-6 * np.maximum(np.abs(v), 1.0))
    fd_err = max(float(np.max(np.abs(fd_dv - an_dv) / denom1)),
                 float(np.max(np.abs(fd_d2 - an_d2) / denom2)))

    return LyapunovReport(
        gradient_violations=int(np.count_nonzero(grad_ratio > 1.0 + tolerance)),
        hessian_violations=int(np.count_nonzero(hess_ratio > 1.0 + tolerance)),
        max_gradient_ratio=float(np.max(grad_ratio)),
        max_hessian_ratio=float(np.max(hess_ratio)),
        max_fd_rel_error=fd_err,
        samples=xs.shape[0])


# ---------------------------------------------------------------------------
# Second-order difference inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SecondOrderReport:
    violations: int
    max_ratio: float
    samples: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def second_order_check(f: Callable[[np.ndarray], np.ndarray], v1, v2, w1, w2,
                       sup_df: float, sup_d2f: float, *,
                       tolerance: float = 1e-9) -> SecondOrderReport:
    """Check the twice-differentiable difference-of-differences inequality

        ||(f(v1)-f(w1)) - (f(v2)-f(w2))||
            <= sup||Df|| ||(v1-w1)-(v2-w2)||
               + 1/2 sup||D2f|| (||v1-w1|| + ||v2-w2||) ||w1-w2||

    at each sampled quadruple.  ``f`` maps (..., d) arrays elementwise.
    """
    v1 = np.atleast_2d(np.asarray(v1, dtype=np.float64))
    v2 = np.atleast_2d(np.asarray(v2, dtype=np.float64))
    w1 = np.atleast_2d(np.asarray(w1, dtype=np.float64))
    w2 = np.atleast_2d(np.asarray(w2, dtype=np.float64))

    def frob(arr):
        return np.sqrt(np.sum(np.asarray(arr, dtype=np.float64) ** 2,
                              axis=tuple(range(1, np.asarray(arr).ndim))))

    lhs = frob((f(v1) - f(w1)) - (f(v2) - f(w2)))
    rhs = (sup_df * frob((v1 - w1) - (v2 - w2))
           + 0.5 * sup_d2f * (frob(v1 - w1) + frob(v2 - w2)) * frob(w1 - w2))
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(lhs == 0.0, 0.0, lhs / rhs)
    return SecondOrderReport(violations=int(np.count_nonzero(ratio > 1.0 + tolerance)),
                             max_ratio=float(np.max(ratio)),
                             samples=v1.shape[0])
