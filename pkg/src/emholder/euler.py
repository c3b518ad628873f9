"""Euler-Maruyama paths over arbitrary partitions from arbitrary starts.

The scheme anchors every time ``t`` at ``a = max{s, round_down(t)}`` and
extends one step:

    X_t = X_a + mu(X_a) (t - a) + sigma(X_a) (W_t - W_a).

With start ``(0, x)`` and a uniform n-cell partition the values at the
grid points are the classical Euler recursion.  All Brownian segment
increments are accumulated left-to-right from the lattice's fine
increments, so values at partition points coincide bitwise with a
recursion driven by the coarsened increments, and restarting from any
grid point reproduces the original path bitwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .brownian import BrownianLattice
from .exceptions import DivergedPathError, ExactSolutionUnavailable
from .grids import Partition, lattice_indices, make_identity
from .models import CoefficientModel

__all__ = ["DiscretePath", "euler_path", "exact_path", "coupled_endpoints"]


@dataclass(frozen=True)
class DiscretePath:
    """Values of one scheme realization at every finest-grid time >= s."""

    model: CoefficientModel
    partition: Partition
    start_time: float
    start_point: np.ndarray
    times: np.ndarray        # finest-grid times s = t_0 < ... <= T
    values: np.ndarray       # shape (len(times), d)
    diverged: bool = False

    def value_at(self, t: float) -> np.ndarray:
        idx = np.searchsorted(self.times, t)
        if idx >= self.times.size or self.times[idx] != t:
            from .exceptions import AlignmentError
            raise AlignmentError(f"time {t!r} is not a stored path time")
        return self.values[idx]

    @property
    def terminal(self) -> np.ndarray:
        return self.values[-1]


def _apply_sigma(sig: np.ndarray, dw: np.ndarray) -> np.ndarray:
    # (B, d, m) x (B, m) -> (B, d)
    return (sig @ dw[..., np.newaxis])[..., 0]


def euler_values_batch(model: CoefficientModel, partition: Partition, s_idx: int,
                       x0: np.ndarray, increments: np.ndarray, finest_n: int,
                       horizon: float, targets, *, tolerate_divergence: bool = False):
    """Euler values for a batch of paths at selected finest-grid indices.

    Args:
        x0: start points, shape (B, d).
        increments: fine Brownian increments, shape (B, finest_n, m).
        targets: increasing finest-grid indices in [s_idx, finest_n].

    Returns:
        (values, diverged): values has shape (B, len(targets), d); diverged
        is a boolean mask of paths that produced non-finite values (always
        all-False unless ``tolerate_divergence``; otherwise the first
        non-finite anchor raises DivergedPathError).
    """
    targets = np.asarray(targets, dtype=np.int64)
    if targets.size and (targets[0] < s_idx or targets[-1] > finest_n):
        raise ValueError("targets must lie in [s_idx, finest_n]")
    if np.any(np.diff(targets) <= 0):
        raise ValueError("targets must be strictly increasing")
    x0 = np.atleast_2d(np.asarray(x0, dtype=np.float64))
    nbatch, d = x0.shape
    h = horizon / finest_n

    part_idx = lattice_indices(partition, finest_n)
    anchor_set = set(int(i) for i in part_idx if i > s_idx)

    out = np.empty((nbatch, targets.size, d), dtype=np.float64)
    if not targets.size:
        return out, np.zeros(nbatch, dtype=bool)
    state = x0.copy()
    ti = 0
    while ti < targets.size and targets[ti] == s_idx:
        out[:, ti] = state
        ti += 1

    g_max = int(targets[-1])
    mu_a = model.mu(state)
    sig_a = model.sigma(state)
    anchor = s_idx
    acc = np.zeros((nbatch, increments.shape[2]), dtype=np.float64)

    for k in range(s_idx + 1, g_max + 1):
        acc = acc + increments[:, k - 1, :]
        is_anchor = k in anchor_set
        hit_target = ti < targets.size and targets[ti] == k
        if hit_target or is_anchor:
            val = state + mu_a * ((k - anchor) * h) + _apply_sigma(sig_a, acc)
            if hit_target:
                out[:, ti] = val
                ti += 1
            if is_anchor:
                state = val
                anchor = k
                acc = np.zeros_like(acc)
                if not np.all(np.isfinite(state)):
                    if not tolerate_divergence:
                        raise DivergedPathError(
                            f"non-finite Euler state at lattice index {k}")
                mu_a = model.mu(state)
                sig_a = model.sigma(state)

    diverged = ~np.all(np.isfinite(out), axis=(1, 2))
    if np.any(diverged) and not tolerate_divergence:
        raise DivergedPathError(f"{int(diverged.sum())} diverged path(s) in batch")
    return out, diverged


def exact_values_batch(model: CoefficientModel, s_idx: int, x0: np.ndarray,
                       increments: np.ndarray, finest_n: int, horizon: float,
                       targets) -> np.ndarray:
    """Closed-form solution values on the shared lattice, same layout as
    :func:`euler_values_batch` (Brownian displacements accumulated from s)."""
    if not model.has_exact:
        raise ExactSolutionUnavailable(f"model {model.name!r} has no closed-form solution")
    targets = np.asarray(targets, dtype=np.int64)
    x0 = np.atleast_2d(np.asarray(x0, dtype=np.float64))
    nbatch = x0.shape[0]
    h = horizon / finest_n
    out = np.empty((nbatch, targets.size, model.d), dtype=np.float64)
    acc = np.zeros((nbatch, increments.shape[2]), dtype=np.float64)
    ti = 0
    while ti < targets.size and targets[ti] == s_idx:
        out[:, ti] = model.exact_state(x0, acc, 0.0)
        ti += 1
    g_max = int(targets[-1]) if targets.size else s_idx
    for k in range(s_idx + 1, g_max + 1):
        acc = acc + increments[:, k - 1, :]
        if ti < targets.size and targets[ti] == k:
            out[:, ti] = model.exact_state(x0, acc, (k - s_idx) * h)
            ti += 1
    return out


def _start_index(lattice: BrownianLattice, s: float) -> int:
    return lattice.index_of(s)


def euler_path(model: CoefficientModel, partition: Partition, s: float, x,
               lattice: BrownianLattice, *, tolerate_divergence: bool = False) -> DiscretePath:
    """Euler-Maruyama path from (s, x) at every finest-grid time >= s."""
    s_idx = _start_index(lattice, s)
    targets = np.arange(s_idx, lattice.finest_n + 1, dtype=np.int64)
    x0 = np.asarray(x, dtype=np.float64).reshape(1, model.d)
    values, diverged = euler_values_batch(
        model, partition, s_idx, x0, lattice.increments[np.newaxis],
        lattice.finest_n, lattice.horizon, targets,
        tolerate_divergence=tolerate_divergence)
    h = lattice.horizon / lattice.finest_n
    return DiscretePath(model=model, partition=partition, start_time=s,
                        start_point=x0[0], times=targets * h, values=values[0],
                        diverged=bool(diverged[0]))


def exact_path(model: CoefficientModel, s: float, x, lattice: BrownianLattice) -> DiscretePath:
    """Closed-form solution path from (s, x) on the lattice times >= s."""
    s_idx = _start_index(lattice, s)
    targets = np.arange(s_idx, lattice.finest_n + 1, dtype=np.int64)
    x0 = np.asarray(x, dtype=np.float64).reshape(1, model.d)
    values = exact_values_batch(model, s_idx, x0, lattice.increments[np.newaxis],
                                lattice.finest_n, lattice.horizon, targets)
    h = lattice.horizon / lattice.finest_n
    return DiscretePath(model=model, partition=make_identity(lattice.horizon),
                        start_time=s, start_point=x0[0], times=targets * h,
                        values=values[0])


def coupled_endpoints(model: CoefficientModel, partitions, starts, lattice: BrownianLattice,
                      t: float) -> np.ndarray:
    """One evaluation at time t per (partition, start) pair on one lattice.

    ``partitions`` may contain identity partitions, which select the
    closed-form solution.  Returns shape (len(partitions), len(starts), d).
    """
    t_idx = lattice.index_of(t)
    out = np.empty((len(partitions), len(starts), model.d), dtype=np.float64)
    for i, part in enumerate(partitions):
        for j, (s, x) in enumerate(starts):
            s_idx = _start_index(lattice, s)
            if t_idx < s_idx:
                raise ValueError(f"evaluation time {t!r} precedes start {s!r}")
            x0 = np.asarray(x, dtype=np.float64).reshape(1, model.d)
            targets = np.array([t_idx], dtype=np.int64)
            if part.kind == "identity":
                vals = exact_values_batch(model, s_idx, x0, lattice.increments[np.newaxis],
                                          lattice.finest_n, lattice.horizon, targets)
            else:
                vals, _ = euler_values_batch(model, part, s_idx, x0,
                                             lattice.increments[np.newaxis],
                                             lattice.finest_n, lattice.horizon, targets)
            out[i, j] = vals[0, 0]
    return out
