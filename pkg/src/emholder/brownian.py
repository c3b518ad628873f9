"""Seeded Brownian increment lattices with exact coarsening.

One lattice holds the i.i.d. Gaussian increments of a single Brownian path
at the finest resolution.  Every coarser grid and every starting point is
driven by the same lattice, which is the coupling that makes strong-error
estimation meaningful.

Sampling scheme (frozen)
------------------------
Increments are a pure function of ``(seed, path_index, finest_n, T, m)``:

1. a Philox4x64 counter-based generator is keyed by the two 64-bit words
   ``(seed, path_index)``;
2. its raw 64-bit outputs are mapped to uniforms in the open interval (0, 1)
   as ``((raw >> 11) + 0.5) * 2**-53``;
3. uniforms become standard normals through the Wichura AS241 rational
   approximation of the inverse normal CDF (implemented below, so the
   sampler does not depend on any library's normal-variate algorithm);
4. normals are scaled by ``sqrt(T / finest_n)``.

Raw value ``i*m + j`` drives coordinate ``j`` of increment ``i``.  This
fixes every sampled number bitwise across platforms, numpy versions,
thread counts and generation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accum import seq_cumsum, seq_segment_sums, seq_sum
from .exceptions import AlignmentError
from .grids import Partition, lattice_indices

__all__ = ["BrownianLattice", "sample_lattice", "coarsen", "value_at", "normal_inverse_cdf"]

# Wichura's AS241 (PPND16) rational approximations, |error| ~ 1e-16.
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coeffs, r):
    acc = np.full_like(r, coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * r + c
    return acc


def normal_inverse_cdf(u: np.ndarray) -> np.ndarray:
    """Standard normal quantile function (AS241), elementwise on (0, 1)."""
    u = np.asarray(u, dtype=np.float64)
    if np.any((u <= 0.0) | (u >= 1.0)):
        raise ValueError("u must lie strictly inside (0, 1)")
    q = u - 0.5
    out = np.empty_like(u)

    central = np.abs(q) <= 0.425
    if np.any(central):
        r = 0.180625 - q[central] * q[central]
        out[central] = q[central] * _poly(_A, r) / _poly(_B, r)

    tails = ~central
    if np.any(tails):
        qt = q[tails]
        r = np.where(qt < 0.0, u[tails], 1.0 - u[tails])
        r = np.sqrt(-np.log(r))
        near = r <= 5.0
        val = np.empty_like(r)
        if np.any(near):
            rn = r[near] - 1.6
            val[near] = _poly(_C, rn) / _poly(_D, rn)
        if np.any(~near):
            rf = r[~near] - 5.0
            val[~near] = _poly(_E, rf) / _poly(_F, rf)
        out[tails] = np.where(qt < 0.0, -val, val)
    return out


@dataclass(frozen=True)
class BrownianLattice:
    """Gaussian increments of one Brownian path at the finest resolution.

    ``increments`` has shape ``(finest_n, m)``; entry ``(i, j)`` is the
    increment of coordinate ``j`` over the i-th finest cell, distributed
    N(0, T/finest_n).
    """

    seed: int
    path_index: int
    finest_n: int
    horizon: float
    m: int
    increments: np.ndarray

    def __post_init__(self):
        inc = np.asarray(self.increments, dtype=np.float64)
        if inc.shape != (self.finest_n, self.m):
            raise ValueError(f"increments shape {inc.shape} != {(self.finest_n, self.m)}")
        inc.setflags(write=False)
        object.__setattr__(self, "increments", inc)

    @property
    def dt(self) -> float:
        return self.horizon / self.finest_n

    def time_of(self, idx: int) -> float:
        return idx * (self.horizon / self.finest_n)

    def index_of(self, t: float) -> int:
        """Finest-lattice index of time ``t``; raises on off-grid times."""
        step = self.horizon / self.finest_n
        idx = int(round(t / step))
        if not (0 <= idx <= self.finest_n) or idx * step != t:
            raise AlignmentError(f"time {t!r} is not on the finest lattice (n={self.finest_n})")
        return idx


def _raw_uniforms(seed: int, path_index: int, count: int) -> np.ndarray:
    key = np.array([seed, path_index], dtype=np.uint64)
    raw = np.random.Philox(key=key).random_raw(count)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def standard_normals(seed: int, path_index: int, count: int) -> np.ndarray:
    """The frozen N(0,1) stream for one (seed, path_index) key."""
    return normal_inverse_cdf(_raw_uniforms(seed, path_index, count))


def sample_lattice(seed: int, path_index: int, finest_n: int, horizon: float,
                   m: int = 1) -> BrownianLattice:
    """Sample the increment lattice for one path (pure in its arguments)."""
    if finest_n < 1:
        raise ValueError("finest_n must be >= 1")
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    z = standard_normals(seed, path_index, finest_n * m).reshape(finest_n, m)
    inc = z * np.sqrt(horizon / finest_n)
    return BrownianLattice(seed=seed, path_index=path_index, finest_n=finest_n,
                           horizon=horizon, m=m, increments=inc)


def sample_increments_batch(seed: int, path_indices, finest_n: int, horizon: float,
                            m: int = 1) -> np.ndarray:
    """Stacked increments, shape (len(path_indices), finest_n, m).

    Row ``k`` is bitwise identical to
    ``sample_lattice(seed, path_indices[k], ...).increments``.
    """
    scale = np.sqrt(horizon / finest_n)
    out = np.empty((len(path_indices), finest_n, m), dtype=np.float64)
    for k, pi in enumerate(path_indices):
        z = standard_normals(seed, int(pi), finest_n * m).reshape(finest_n, m)
        out[k] = z * scale
    return out


def coarsen(lattice: BrownianLattice, partition: Partition) -> np.ndarray:
    """Increments over the partition's cells, shape (n_cells, m).

    Each coarse increment is the left-to-right sum of the fine increments it
    spans (fresh accumulator per cell), so nested grids reuse the identical
    numbers.
    """
    bounds = lattice_indices(partition, lattice.finest_n)
    if partition.kind == "identity":
        return lattice.increments
    if bounds[0] != 0 or bounds[-1] != lattice.finest_n:
        raise AlignmentError("partition does not span the lattice horizon")
    return seq_segment_sums(lattice.increments, bounds, axis=0)


def value_at(lattice: BrownianLattice, t: float) -> np.ndarray:
    """Path value W_t (prefix sum of increments); requires lattice-aligned t."""
    idx = lattice.index_of(t)
    if idx == 0:
        return np.zeros(lattice.m)
    return seq_sum(lattice.increments[:idx], axis=0)


def prefix_values(increments: np.ndarray) -> np.ndarray:
    """All prefix values W_0..W_N from increments (..., N, m) -> (..., N+1, m)."""
    increments = np.asarray(increments, dtype=np.float64)
    n = increments.shape[-2]
    shape = increments.shape[:-2] + (n + 1,) + increments.shape[-1:]
    out = np.zeros(shape, dtype=np.float64)
    out[..., 1:, :] = seq_cumsum(increments, axis=-2)
    return out
