"""Time partitions of [0, T], the identity map, round-down evaluation and mesh.

A :class:`Partition` is either a finite grid ``0 = t_0 < t_1 < ... < t_n = T``
or the identity map (the no-discretization limit, mesh 0).  The round-down
map sends ``t`` to the left endpoint of its cell with the half-open
convention: the first cell ``[t_0, t_1]`` is closed and every later cell
``(t_k, t_{k+1}]`` is open on the left, so a grid point ``t_k`` with
``k >= 1`` rounds down to ``t_{k-1}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Partition", "make_uniform", "make_identity", "from_points", "round_down", "mesh"]


@dataclass(frozen=True)
class Partition:
    """An element of the partition class, or the identity map.

    Attributes:
        horizon: the right endpoint T > 0.
        kind: "grid" or "identity".
        points: strictly increasing grid points (empty for identity).
        uniform_n: number of cells when the grid is exactly uniform, else None.
            Uniform grids get an integer-index fast path so round-down is
            bit-exact on lattice times.
    """

    horizon: float
    kind: str
    points: np.ndarray = field(default_factory=lambda: np.empty(0))
    uniform_n: int | None = None

    def __post_init__(self):
        if self.kind not in ("grid", "identity"):
            raise ValueError(f"unknown partition kind {self.kind!r}")
        if not (self.horizon > 0.0 and np.isfinite(self.horizon)):
            raise ValueError("horizon must be a positive finite real")
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if self.kind == "grid":
            if pts.size < 2:
                raise ValueError("a grid partition needs at least two points")
            if pts[0] != 0.0 or pts[-1] != self.horizon:
                raise ValueError("grid points must start at 0 and end at the horizon")
            if np.any(np.diff(pts) <= 0.0):
                raise ValueError("grid points must be strictly increasing")
        else:
            if pts.size != 0:
                raise ValueError("identity partition carries no points")
        pts.setflags(write=False)

    @property
    def n_cells(self) -> int:
        return 0 if self.kind == "identity" else self.points.size - 1

    def to_json(self) -> str:
        if self.kind == "identity":
            return json.dumps({"identity": {"T": self.horizon}})
        if self.uniform_n is not None:
            return json.dumps({"uniform": {"n": self.uniform_n, "T": self.horizon}})
        return json.dumps(list(map(float, self.points)))

    @staticmethod
    def from_json(source: str) -> "Partition":
        data = json.loads(source)
        if isinstance(data, dict) and "uniform" in data:
            spec = data["uniform"]
            return make_uniform(int(spec["n"]), float(spec["T"]))
        if isinstance(data, dict) and "identity" in data:
            return make_identity(float(data["identity"]["T"]))
        if isinstance(data, list):
            return from_points(data)
        raise ValueError("unrecognized partition JSON")


def make_uniform(n: int, horizon: float) -> Partition:
    """Uniform partition with points k*T/n, k = 0..n."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not horizon > 0.0:
        raise ValueError("horizon must be positive")
    step = horizon / n
    points = np.arange(n + 1, dtype=np.float64) * step
    points[-1] = horizon
    return Partition(horizon=float(horizon), kind="grid", points=points, uniform_n=n)


def make_identity(horizon: float) -> Partition:
    """The identity map on [0, T] (exact-solution limit, mesh 0)."""
    return Partition(horizon=float(horizon), kind="identity")


def from_points(points) -> Partition:
    """Grid partition from an explicit increasing point list."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size < 2:
        raise ValueError("need at least two points")
    return Partition(horizon=float(pts[-1]), kind="grid", points=pts)


def round_down(partition: Partition, t: float) -> float:
    """Left grid point of the cell containing ``t``; identity returns ``t``.

    ``t_1`` maps to ``t_0`` (half-open cells), while any ``t`` in the closed
    first cell maps to ``t_0``.
    """
    if not 0.0 <= t <= partition.horizon:
        raise ValueError(f"t={t!r} outside [0, {partition.horizon!r}]")
    if partition.kind == "identity":
        return float(t)
    pts = partition.points
    k = int(np.searchsorted(pts, t, side="left")) - 1
    if k < 0:
        k = 0
    return float(pts[k])


def round_down_index(partition: Partition, idx: int, finest_n: int) -> int:
    """Round-down in finest-lattice index space (exact integer arithmetic).

    ``idx`` indexes the uniform finest lattice with ``finest_n`` cells over
    the partition's horizon.  Only valid when every partition point lies on
    that lattice; uniform partitions use pure index arithmetic, general ones
    use the cached lattice indices of their points.
    """
    if not 0 <= idx <= finest_n:
        raise ValueError(f"lattice index {idx} outside [0, {finest_n}]")
    if partition.kind == "identity":
        return idx
    if partition.uniform_n is not None:
        ratio, rem = divmod(finest_n, partition.uniform_n)
        if rem:
            raise ValueError(f"finest_n={finest_n} not divisible by n={partition.uniform_n}")
        k = -(-idx // ratio) - 1  # ceil(idx/ratio) - 1
        return max(k, 0) * ratio
    indices = lattice_indices(partition, finest_n)
    j = int(np.searchsorted(indices, idx, side="left")) - 1
    if j < 0:
        j = 0
    return int(indices[j])


def lattice_indices(partition: Partition, finest_n: int) -> np.ndarray:
    """Finest-lattice indices of the partition points.

    Raises :class:`~emholder.exceptions.AlignmentError` if any point is off
    the lattice.
    """
    from .exceptions import AlignmentError

    if partition.kind == "identity":
        return np.arange(finest_n + 1, dtype=np.int64)
    if partition.uniform_n is not None:
        ratio, rem = divmod(finest_n, partition.uniform_n)
        if rem:
            raise AlignmentError(
                f"uniform partition with n={partition.uniform_n} does not divide finest_n={finest_n}"
            )
        return np.arange(partition.uniform_n + 1, dtype=np.int64) * ratio
    step = partition.horizon / finest_n
    idx = np.rint(partition.points / step).astype(np.int64)
    if np.any(idx * step != partition.points):
        bad = partition.points[idx * step != partition.points][0]
        raise AlignmentError(f"partition point {bad!r} is not on the finest lattice")
    return idx


def mesh(partition: Partition) -> float:
    """Largest gap between consecutive grid points; 0 for the identity."""
    if partition.kind == "identity":
        return 0.0
    return float(np.max(np.diff(partition.points)))
