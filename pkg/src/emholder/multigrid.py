"""Piecewise-linear interpolation on dyadic grids and the telescoping
multigrid combination, with a simple cost model.

The interpolation operator acts on samples ``a_0..a_N`` at the nodes
``k/N`` of [0, 1].  The multigrid combination sums, over levels
``l = 0..n-1``, the interpolant of the level's fine samples (2^{l+1}
cells) minus, for ``l >= 1``, the interpolant of its coarse samples
(2^l cells).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GridFunction", "interpolate", "multigrid_sum", "cost"]


@dataclass(frozen=True)
class GridFunction:
    """Samples a_0..a_N of a function at the nodes k/N of [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("a grid function needs at least two samples (N >= 1)")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function samples must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_cells(self) -> int:
        return self.values.size - 1

    def to_json(self) -> str:
        import json
        return json.dumps(list(map(float, self.values)))

    @staticmethod
    def from_json(source: str) -> "GridFunction":
        import json
        return GridFunction(np.asarray(json.loads(source), dtype=np.float64))


def interpolate(a: GridFunction, t) -> np.ndarray | float:
    """Piecewise-linear value at t in [0, 1]:
    ``a_k (k+1 - N t) + a_{k+1} (N t - k)`` with ``k = min(floor(N t), N-1)``
    (the clamp makes t = 1 return a_N exactly).
    """
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any((t_arr < 0.0) | (t_arr > 1.0)):
        raise ValueError("t must lie in [0, 1]")
    n = a.n_cells
    k = np.minimum(np.floor(n * t_arr).astype(np.int64), n - 1)
    vals = a.values
    out = vals[k] * (k + 1 - n * t_arr) + vals[k + 1] * (n * t_arr - k)
    return float(out) if np.isscalar(t) else out


def multigrid_sum(levels, t) -> np.ndarray | float:
    """Telescoping combination of per-level (fine, coarse) grid functions.

    ``levels[l]`` is a pair ``(fine, coarse)`` where fine has 2^{l+1}
    cells and coarse has 2^l cells; level 0 carries no coarse term
    (``levels[0]`` may be ``(fine, None)``).

    The addends are summed pairing each level's fine term with the NEXT
    level's coarse term, i.e. ``(f_0 - c_1) + (f_1 - c_2) + ... + f_{n-1}``.
    This is the same addend set as the level-wise differences, but when all
    levels sample one function the pairs cancel exactly and the result is
    bitwise the finest interpolant.
    """
    if not levels:
        raise ValueError("need at least one level")
    fines = []
    coarses = []
    for lvl, pair in enumerate(levels):
        fine, coarse = pair
        if fine.n_cells != 2 ** (lvl + 1):
            raise ValueError(f"level {lvl} fine grid must have {2 ** (lvl + 1)} cells, "
                             f"got {fine.n_cells}")
        if lvl == 0:
            if coarse is not None:
                raise ValueError("level 0 carries no coarse grid function")
        else:
            if coarse is None or coarse.n_cells != 2 ** lvl:
                raise ValueError(f"level {lvl} coarse grid must have {2 ** lvl} cells")
        fines.append(fine)
        coarses.append(coarse)

    total = None
    for lvl in range(len(levels)):
        f_val = interpolate(fines[lvl], t)
        if lvl + 1 < len(levels):
            term = f_val - interpolate(coarses[lvl + 1], t)
        else:
            term = f_val
        total = term if total is None else total + term
    return total


def cost(n: int, per_sample_cost) -> tuple[float, float]:
    """(single_grid, multigrid) evaluation-count costs at accuracy level n.

    ``per_sample_cost(j)`` is the cost of one sample at accuracy level j.
    Single grid: (2^n + 1) C(n).  Multigrid: sum over l of
    [(2^{l+1}+1) + 1_{l>=1} (2^l+1)] C(n-l).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    single = (2 ** n + 1) * per_sample_cost(n)
    multi = 0.0
    for lvl in range(n):
        samples = (2 ** (lvl + 1) + 1) + ((2 ** lvl + 1) if lvl >= 1 else 0)
        multi += samples * per_sample_cost(n - lvl)
    return float(single), float(multi)
