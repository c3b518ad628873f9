"""Deterministic floating-point accumulation helpers.

Every Brownian-increment aggregation in this package uses strict
left-to-right summation along the time axis so that results are
bit-reproducible across numpy versions, array layouts, batch sizes and
thread counts.  ``numpy.sum`` is deliberately avoided on the time axis:
its pairwise blocking is an implementation detail that may change.
"""

from __future__ import annotations

import numpy as np


def seq_cumsum(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Running left-to-right sums along ``axis``.

    Equivalent to ``np.cumsum`` semantics but with a frozen sequential
    association: ``out[..., k] = out[..., k-1] + values[..., k]``.
    """
    values = np.asarray(values, dtype=np.float64)
    moved = np.moveaxis(values, axis, 0)
    out = np.empty_like(moved)
    acc = np.zeros(moved.shape[1:], dtype=np.float64)
    for k in range(moved.shape[0]):
        acc = acc + moved[k]
        out[k] = acc
    return np.moveaxis(out, 0, axis)


def seq_sum(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Strict left-to-right sum along ``axis`` (fresh accumulator)."""
    values = np.asarray(values, dtype=np.float64)
    moved = np.moveaxis(values, axis, 0)
    acc = np.zeros(moved.shape[1:], dtype=np.float64)
    for k in range(moved.shape[0]):
        acc = acc + moved[k]
    return acc


def seq_segment_sums(values: np.ndarray, boundaries: np.ndarray, axis: int = -1) -> np.ndarray:
    """Per-segment left-to-right sums.

    ``boundaries`` is an increasing integer array ``b_0 <= b_1 <= ... <= b_K``;
    segment ``j`` covers indices ``[b_j, b_{j+1})`` along ``axis``.  Each
    segment is summed with a fresh accumulator, left to right, so segment
    sums are independent of how neighbouring segments are grouped.
    """
    values = np.asarray(values, dtype=np.float64)
    boundaries = np.asarray(boundaries, dtype=np.int64)
    if boundaries.ndim != 1 or boundaries.size < 2:
        raise ValueError("boundaries must be a 1-d array with at least two entries")
    if np.any(np.diff(boundaries) < 0):
        raise ValueError("boundaries must be nondecreasing")
    moved = np.moveaxis(values, axis, 0)
    nseg = boundaries.size - 1
    out = np.empty((nseg,) + moved.shape[1:], dtype=np.float64)
    for j in range(nseg):
        lo, hi = int(boundaries[j]), int(boundaries[j + 1])
        acc = np.zeros(moved.shape[1:], dtype=np.float64)
        for k in range(lo, hi):
            acc = acc + moved[k]
        out[j] = acc
    return np.moveaxis(out, 0, axis)
