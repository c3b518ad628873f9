"""Monte Carlo estimation of the coupled L^p error statistics, the
quadrature oracle for exact means, and log-log rate regression.

Every estimator is a pure function of (seed, configuration): path i draws
its Brownian increments from the frozen counter-based stream keyed by
(seed, i), statistics are reduced with exactly-rounded summation
(math.fsum) in a batch-size-independent way, and worker threads only
partition the path range, so results are bitwise identical across runs,
chunk sizes and thread counts.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .bounds import (BoundParams, bound_four_point, bound_full, bound_moment,
                     bound_spatial_time, bound_strong_error, bound_time_space)
from .brownian import sample_increments_batch
from .euler import euler_values_batch, exact_values_batch
from .exceptions import AlignmentError, DivergedPathError, EstimationError, QuadratureError
from .grids import Partition, make_uniform, mesh
from .models import CoefficientModel

__all__ = [
    "ErrorStat", "RateFit", "HolderRow", "HolderSweepConfig",
    "lp_moment", "two_point_stat", "four_point_stat", "holder_sweep",
    "mc_euler_functional", "gauss_hermite_mean", "lipschitz_quotient_mc",
    "fit_rate", "identity_functional",
]

_CHUNK = 1024
_REFERENCE_REFINEMENT = 16  # proxy reference grid is 2^4 levels below n


@dataclass(frozen=True)
class ErrorStat:
    """A Monte Carlo (E ||Z||^p)^{1/p} estimate with its standard error.

    ``raw_moment`` is the sample mean of ||Z||^p; ``std_error`` is the
    delta-method standard error of ``estimate = raw_moment^{1/p}``;
    ``bound`` carries the matching closed-form bound when one applies and
    ``quotient`` the normalized (Holder) value of the estimate.
    """

    estimate: float
    raw_moment: float
    std_error: float
    samples: int
    p: float
    bound: float | None = None
    quotient: float | None = None
    note: str | None = None


@dataclass(frozen=True)
class RateFit:
    """Least-squares slope/intercept of log(e) against log(n)."""

    slope: float
    intercept: float
    residual_l2: float
    points: tuple


def identity_functional(states: np.ndarray) -> np.ndarray:
    """f(x) = x_0, the scalar reading of a (..., d) state array."""
    return np.asarray(states, dtype=np.float64)[..., 0]


def _stat_from_norms(norms: np.ndarray, p: float, *, quotient_denom: float | None = None,
                     bound: float | None = None, note: str | None = None) -> ErrorStat:
    """Delta-method ErrorStat from per-path norms ||Z_i|| in path order."""
    norms = np.asarray(norms, dtype=np.float64)
    m = norms.size
    powered = norms ** p
    raw = math.fsum(powered) / m
    estimate = raw ** (1.0 / p) if raw > 0.0 else 0.0
    if m >= 2:
        var = math.fsum((powered - raw) ** 2) / (m - 1)
        sd = math.sqrt(max(var, 0.0))
        if raw > 0.0:
            std_error = sd / math.sqrt(m) * (1.0 / p) * raw ** (1.0 / p - 1.0)
        else:
            std_error = 0.0
    else:
        std_error = 0.0
    quotient = estimate / quotient_denom if quotient_denom else None
    return ErrorStat(estimate=estimate, raw_moment=raw, std_error=std_error,
                     samples=m, p=p, bound=bound, quotient=quotient, note=note)


def lp_moment(sampler: Callable[[int], np.ndarray], p: float, num_paths: int) -> ErrorStat:
    """(E ||Z||^p)^{1/p} over ``Z_i = sampler(i)``, i ascending.

    ``sampler`` must be pure in the path index (seeds belong in its
    closure); a non-finite sample raises EstimationError.
    """
    if p < 1.0:
        raise ValueError("p must be >= 1")
    if num_paths < 2:
        raise ValueError("num_paths must be >= 2")
    norms = np.empty(num_paths, dtype=np.float64)
    for i in range(num_paths):
        z = np.asarray(sampler(i), dtype=np.float64)
        if not np.all(np.isfinite(z)):
            raise EstimationError(f"sampler produced a non-finite value at path {i}")
        norms[i] = np.linalg.norm(z.ravel())
    return _stat_from_norms(norms, p)


def _map_chunks(total: int, threads: int, job: Callable[[int, int], None]):
    ranges = [(lo, min(lo + _CHUNK, total)) for lo in range(0, total, _CHUNK)]
    if threads <= 1:
        for lo, hi in ranges:
            job(lo, hi)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda r: job(*r), ranges))


def _aligned_index(t: float, finest_n: int, horizon: float) -> int:
    step = horizon / finest_n
    idx = int(round(t / step))
    if not (0 <= idx <= finest_n) or idx * step != t:
        raise AlignmentError(f"time {t!r} is not on the lattice with {finest_n} cells")
    return idx


def _reference_values(model: CoefficientModel, s_idx: int, x0: np.ndarray,
                      increments: np.ndarray, finest_n: int, horizon: float, targets):
    """Exact solution when available, else Euler on the finest grid."""
    if model.has_exact:
        return exact_values_batch(model, s_idx, x0, increments, finest_n, horizon, targets)
    finest = make_uniform(finest_n, horizon)
    values, _ = euler_values_batch(model, finest, s_idx, x0, increments,
                                   finest_n, horizon, targets)
    return values


def _coupled_norms(model: CoefficientModel, n: int, starts: Sequence[float], p: float,
                   num_paths: int, seed: int, t: float, horizon: float, threads: int,
                   combine: Callable[[list[np.ndarray]], np.ndarray]) -> tuple[np.ndarray, str | None]:
    """Per-path norms of a combination of coupled (Euler, reference) endpoint
    pairs, one pair per start point, all on one lattice per path."""
    if model.has_exact:
        finest_n = n
        note = None
    else:
        finest_n = n * _REFERENCE_REFINEMENT
        note = f"reference=euler(n={finest_n})"
    t_idx = _aligned_index(t, finest_n, horizon)
    partition = make_uniform(n, horizon)
    targets = np.array([t_idx], dtype=np.int64)
    norms = np.empty(num_paths, dtype=np.float64)

    def job(lo: int, hi: int):
        inc = sample_increments_batch(seed, range(lo, hi), finest_n, horizon, model.m)
        columns = []
        for x in starts:
            x0 = np.tile(np.asarray(x, dtype=np.float64).reshape(1, model.d), (hi - lo, 1))
            try:
                ev, _ = euler_values_batch(model, partition, 0, x0, inc,
                                           finest_n, horizon, targets)
            except DivergedPathError as err:
                raise EstimationError(str(err)) from err
            rv = _reference_values(model, 0, x0, inc, finest_n, horizon, targets)
            columns.append((ev[:, 0, :], rv[:, 0, :]))
        z = combine(columns)
        norms[lo:hi] = np.linalg.norm(z.reshape(hi - lo, -1), axis=1)

    _map_chunks(num_paths, threads, job)
    return norms, note


def two_point_stat(model: CoefficientModel, n: int, x, p: float, num_paths: int,
                   seed: int, t: float | None = None, horizon: float = 1.0,
                   threads: int = 1) -> ErrorStat:
    """(E ||X_t^x - Y_t^{n,x}||^p)^{1/p} on a shared lattice, with the
    normalized quotient estimate/(1 + ||x||)."""
    t = horizon if t is None else t
    norms, note = _coupled_norms(
        model, n, [x], p, num_paths, seed, t, horizon, threads,
        combine=lambda cols: cols[0][0] - cols[0][1])
    denom = 1.0 + float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=np.float64))))
    return _stat_from_norms(norms, p, quotient_denom=denom, note=note)


def four_point_stat(model: CoefficientModel, n: int, x, y, p: float, num_paths: int,
                    seed: int, t: float | None = None, horizon: float = 1.0,
                    threads: int = 1, normalize: bool = True) -> ErrorStat:
    """(E ||(X_t^x - Y_t^{n,x}) - (X_t^y - Y_t^{n,y})||^p)^{1/p}, all four
    paths on one lattice; the quotient divides by ||x-y|| (1 + ||x|| + ||y||)."""
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    ya = np.atleast_1d(np.asarray(y, dtype=np.float64))
    dist = float(np.linalg.norm(xa - ya))
    if normalize and dist == 0.0:
        raise ValueError("x == y has no normalized quotient; pass normalize=False")
    t = horizon if t is None else t
    norms, note = _coupled_norms(
        model, n, [x, y], p, num_paths, seed, t, horizon, threads,
        combine=lambda cols: (cols[0][0] - cols[0][1]) - (cols[1][0] - cols[1][1]))
    denom = dist * (1.0 + float(np.linalg.norm(xa)) + float(np.linalg.norm(ya)))
    return _stat_from_norms(norms, p, quotient_denom=denom if normalize else None, note=note)


# ---------------------------------------------------------------------------
# Temporal-spatial sweep
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HolderSweepConfig:
    """Grids for the sweep; partner coordinates are the cyclically next
    entries of each list, so all (s, t, x) triples get a distinct
    (s~, t~, x~).  Every t value must dominate every s value."""

    s_values: tuple
    t_values: tuple
    x_values: tuple
    n_values: tuple
    horizon: float = 1.0

    def __post_init__(self):
        if min(self.t_values) < max(self.s_values):
            raise ValueError("every t value must be >= every s value")
        if any(s < 0.0 for s in self.s_values) or any(t > self.horizon for t in self.t_values):
            raise ValueError("times must lie in [0, horizon]")


@dataclass(frozen=True)
class HolderRow:
    item: str                 # "i".."vi"
    n: int
    s: float
    t: float
    x: float
    s_tilde: float
    t_tilde: float
    x_tilde: float
    stat: ErrorStat

    @property
    def dominated(self) -> bool:
        """estimate <= bound + 3 * std_error (inf bounds dominate trivially)."""
        assert self.stat.bound is not None
        return self.stat.estimate <= self.stat.bound + 3.0 * self.stat.std_error

    def label(self) -> str:
        # semicolon-separated so the label fits in one unquoted CSV cell
        return (f"{self.item}(s={self.s:g};t={self.t:g};x={self.x:g};"
                f"s~={self.s_tilde:g};t~={self.t_tilde:g};x~={self.x_tilde:g})")


def holder_sweep(model: CoefficientModel, config: HolderSweepConfig, p: float,
                 num_paths: int, seed: int, threads: int = 1) -> tuple[list[HolderRow], list[str]]:
    """Monte Carlo estimates of the six bounded temporal-spatial statistics,
    each paired with its closed-form bound.

    For every grid triple the scheme and the closed-form solution are driven
    by one lattice per path, from every needed (start time, start point)
    pair; the per-pair endpoint tensors are computed once per n and shared
    by all rows.  Items v and vi use the L^{p/2} norm and need p >= 4; with
    p < 4 they are skipped and a notice is returned.
    """
    if p < 2.0:
        raise ValueError("p must be >= 2")
    params = BoundParams.from_model(model, p, config.horizon)
    lyap = params.lyapunov
    horizon = config.horizon
    notices: list[str] = []
    want_vi = p >= 4.0
    if not want_vi:
        notices.append(f"items v and vi skipped: they need p >= 4, got p={p:g}")

    s_list = [float(v) for v in config.s_values]
    t_list = [float(v) for v in config.t_values]
    x_list = [float(v) for v in config.x_values]
    rows: list[HolderRow] = []

    for n in config.n_values:
        partition = make_uniform(int(n), horizon)
        grid_mesh = mesh(partition)
        euler_vals, exact_vals, t_pos = _sweep_endpoints(
            model, partition, s_list, t_list, x_list, num_paths, seed, horizon, threads)

        for si, s in enumerate(s_list):
            for tj, t in enumerate(t_list):
                for xk, x in enumerate(x_list):
                    st = s_list[(si + 1) % len(s_list)]
                    tt = t_list[(tj + 1) % len(t_list)]
                    xt = x_list[(xk + 1) % len(x_list)]
                    sit = (si + 1) % len(s_list)
                    ttj = (tj + 1) % len(t_list)
                    xkt = (xk + 1) % len(x_list)

                    ex_t = euler_vals[si, xk][:, t_pos[tj], :]
                    ex_tt = euler_vals[si, xk][:, t_pos[ttj], :]
                    ext_t = euler_vals[si, xkt][:, t_pos[tj], :]
                    ext_tt = euler_vals[si, xkt][:, t_pos[ttj], :]
                    ext_st_tt = euler_vals[sit, xkt][:, t_pos[ttj], :]
                    i_x = exact_vals[si, xk][:, t_pos[tj], :]
                    i_xt = exact_vals[si, xkt][:, t_pos[tj], :]
                    i_xt_st = exact_vals[sit, xkt][:, t_pos[ttj], :]

                    stats = {
                        "i": _stat_from_norms(lyap.value(ex_t), 1.0),
                        "ii": _stat_from_norms(np.linalg.norm(ex_t - i_x, axis=1), p),
                        "iii": _stat_from_norms(np.linalg.norm(ex_t - ext_st_tt, axis=1), p),
                        "iv": _stat_from_norms(np.linalg.norm(
                            (ex_tt - ex_t) - (ext_tt - ext_t), axis=1), p),
                    }
                    if want_vi:
                        stats["v"] = _stat_from_norms(np.linalg.norm(
                            (i_x - ex_t) - (i_xt - ext_t), axis=1), p / 2.0)
                        stats["vi"] = _stat_from_norms(np.linalg.norm(
                            (i_x - i_xt_st) - (ex_t - ext_st_tt), axis=1), p / 2.0)

                    xa, xta = np.array([x]), np.array([xt])
                    bound_map = {
                        "i": bound_moment(params, xa, s, t),
                        "ii": bound_strong_error(params, xa, s, t, grid_mesh),
                        "iii": bound_time_space(params, xa, xta, s, st, t, tt),
                        "iv": bound_spatial_time(params, xa, xta, t, tt),
                    }
                    if want_vi:
                        bound_map["v"] = bound_four_point(params, xa, xta, xa, xta,
                                                          s, t, grid_mesh)
                        bound_map["vi"] = bound_full(params, xa, xta, s, st, t, tt,
                                                     grid_mesh)
                    for item, stat in stats.items():
                        rows.append(HolderRow(
                            item=item, n=int(n), s=s, t=t, x=x, s_tilde=st,
                            t_tilde=tt, x_tilde=xt,
                            stat=replace(stat, bound=bound_map[item])))
    return rows, notices


def _sweep_endpoints(model, partition, s_list, t_list, x_list, num_paths, seed,
                     horizon, threads):
    """Euler and closed-form endpoint tensors for every (s, x) pair at every
    t value, all driven by the same per-path lattice.

    Returns (euler_vals, exact_vals, t_pos): dicts keyed by (s_index,
    x_index) holding (num_paths, n_targets, d) arrays, and the map from
    t-list position to target column.
    """
    finest_n = partition.uniform_n
    s_idx = [_aligned_index(s, finest_n, horizon) for s in s_list]
    t_idx = [_aligned_index(t, finest_n, horizon) for t in t_list]
    targets = np.unique(np.array(t_idx, dtype=np.int64))
    t_pos = {j: int(np.searchsorted(targets, t_idx[j])) for j in range(len(t_list))}

    pairs = [(si, xk) for si in range(len(s_list)) for xk in range(len(x_list))]
    shape = (num_paths, targets.size, model.d)
    euler_vals = {pair: np.empty(shape) for pair in pairs}
    exact_vals = {pair: np.empty(shape) for pair in pairs}

    def job(lo: int, hi: int):
        inc = sample_increments_batch(seed, range(lo, hi), finest_n, horizon, model.m)
        for si, xk in pairs:
            x0 = np.tile(np.asarray([x_list[xk]], dtype=np.float64).reshape(1, model.d),
                         (hi - lo, 1))
            try:
                ev, _ = euler_values_batch(model, partition, s_idx[si], x0, inc,
                                           finest_n, horizon, targets)
            except DivergedPathError as err:
                raise EstimationError(str(err)) from err
            euler_vals[si, xk][lo:hi] = ev
            exact_vals[si, xk][lo:hi] = exact_values_batch(
                model, s_idx[si], x0, inc, finest_n, horizon, targets)

    _map_chunks(num_paths, threads, job)
    return euler_vals, exact_vals, t_pos


# ---------------------------------------------------------------------------
# Monte Carlo Euler functionals and the quadrature oracle
# ---------------------------------------------------------------------------

def mc_euler_functional(model: CoefficientModel, f: Callable[[np.ndarray], np.ndarray],
                        n: int, x, seed: int, horizon: float = 1.0,
                        path_offset: int = 0) -> float:
    """Average of f over n independent Euler paths with n steps each.

    Path i uses the stream keyed by (seed, path_offset + i).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    partition = make_uniform(n, horizon)
    x0 = np.tile(np.asarray(x, dtype=np.float64).reshape(1, model.d), (n, 1))
    inc = sample_increments_batch(seed, range(path_offset, path_offset + n), n,
                                  horizon, model.m)
    try:
        vals, _ = euler_values_batch(model, partition, 0, x0, inc, n, horizon, [n])
    except DivergedPathError as err:
        raise EstimationError(str(err)) from err
    return math.fsum(np.asarray(f(vals[:, 0, :]), dtype=np.float64)) / n


@lru_cache(maxsize=None)
def _hermite_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes/weights by Golub-Welsch (numpy's recurrence-based
    hermgauss overflows to NaN weights beyond ~400 nodes)."""
    beta = np.sqrt(np.arange(1, nodes) / 2.0)
    xi, vecs = np.linalg.eigh(np.diag(beta, 1) + np.diag(beta, -1))
    w = np.sqrt(np.pi) * vecs[0] ** 2
    xi.setflags(write=False)
    w.setflags(write=False)
    return xi, w


def gauss_hermite_mean(model: CoefficientModel, f: Callable[[np.ndarray], np.ndarray],
                       x, t: float, *, min_nodes: int = 16, max_nodes: int = 512,
                       tol: float = 1e-10) -> float:
    """E[f(X_t^x)] for closed-form models by Gauss-Hermite quadrature.

    Doubles the node count until the value moves by less than ``tol``;
    raises QuadratureError beyond ``max_nodes``.
    """
    if model.m != 1 or model.d != 1:
        raise ValueError("the quadrature oracle handles scalar models only")
    if min_nodes < 16:
        raise ValueError("nodes must be >= 16")
    x0 = np.asarray(x, dtype=np.float64).reshape(1, 1)

    def at(nodes: int) -> float:
        xi, w = _hermite_rule(nodes)
        disp = (math.sqrt(2.0 * t) * xi)[:, np.newaxis] if t > 0.0 else np.zeros((nodes, 1))
        states = model.exact_state(np.broadcast_to(x0, (nodes, 1)), disp, t)
        fv = np.asarray(f(states), dtype=np.float64)
        return math.fsum(w * fv) / math.sqrt(math.pi)

    nodes = min_nodes
    previous = at(nodes)
    while nodes * 2 <= max_nodes:
        nodes *= 2
        current = at(nodes)
        if abs(current - previous) < tol:
            return current
        previous = current
    raise QuadratureError(
        f"Gauss-Hermite mean did not converge to {tol:g} within {max_nodes} nodes")


def lipschitz_quotient_mc(model: CoefficientModel, f: Callable[[np.ndarray], np.ndarray],
                          n: int, x, y, p: float, replications: int, seed: int,
                          horizon: float = 1.0, threads: int = 1) -> ErrorStat:
    """The scaled spatial-Lipschitz statistic of centered Monte Carlo Euler
    averages:  sqrt(n) (E|A|^p)^{1/p} / (||x-y|| (1 + ||x|| + ||y||)), where
    each replication's A averages, over n coupled Euler paths with n steps,
    the centered difference of f-values between starts x and y.

    Centering means come from the Gauss-Hermite oracle, so the model needs a
    closed-form solution.  Replication r uses path indices r*n..(r+1)*n-1.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=np.float64))
    ya = np.atleast_1d(np.asarray(y, dtype=np.float64))
    dist = float(np.linalg.norm(xa - ya))
    if dist == 0.0:
        raise ValueError("x and y must differ")
    if replications < 2:
        raise ValueError("need at least 2 replications")
    mean_x = gauss_hermite_mean(model, f, x, horizon)
    mean_y = gauss_hermite_mean(model, f, y, horizon)
    center = mean_x - mean_y

    partition = make_uniform(n, horizon)
    reps = np.empty(replications, dtype=np.float64)

    def job(lo: int, hi: int):
        for r in range(lo, hi):
            inc = sample_increments_batch(seed, range(r * n, (r + 1) * n), n,
                                          horizon, model.m)
            x0 = np.tile(xa.reshape(1, model.d), (n, 1))
            y0 = np.tile(ya.reshape(1, model.d), (n, 1))
            try:
                vx, _ = euler_values_batch(model, partition, 0, x0, inc, n, horizon, [n])
                vy, _ = euler_values_batch(model, partition, 0, y0, inc, n, horizon, [n])
            except DivergedPathError as err:
                raise EstimationError(str(err)) from err
            diff = (np.asarray(f(vx[:, 0, :]), dtype=np.float64)
                    - np.asarray(f(vy[:, 0, :]), dtype=np.float64))
            reps[r] = math.fsum(diff) / n - center

    _map_chunks(replications, threads, job)
    denom = dist * (1.0 + float(np.linalg.norm(xa)) + float(np.linalg.norm(ya)))
    stat = _stat_from_norms(np.abs(reps), p)
    scale = math.sqrt(n) / denom
    return replace(stat, estimate=stat.estimate * scale,
                   std_error=stat.std_error * scale,
                   quotient=stat.estimate * scale)


def fit_rate(points: Sequence[tuple[float, float]]) -> RateFit:
    """Ordinary least squares on (log n, log e); needs >= 2 points, e > 0."""
    pts = [(float(n), float(e)) for n, e in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    if any(e <= 0.0 for _, e in pts):
        raise ValueError("all error values must be positive")
    if len({n for n, _ in pts}) < 2:
        raise ValueError("need at least two distinct n values")
    log_n = np.log([n for n, _ in pts])
    log_e = np.log([e for _, e in pts])
    design = np.column_stack([log_n, np.ones_like(log_n)])
    coeffs, *_ = np.linalg.lstsq(design, log_e, rcond=None)
    slope, intercept = float(coeffs[0]), float(coeffs[1])
    resid = log_e - design @ coeffs
    return RateFit(slope=slope, intercept=intercept,
                   residual_l2=float(np.linalg.norm(resid)), points=tuple(pts))
