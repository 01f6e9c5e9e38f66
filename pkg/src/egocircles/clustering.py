"""One-dimensional clustering of tie frequencies.

Two routines live here:

* :func:`mean_shift_1d` finds the number of intimacy layers automatically
  (Gaussian-kernel Mean Shift on log-scaled frequencies).
* :func:`kpartition_1d` splits values into exactly ``k`` contiguous groups
  minimising the within-group sum of squares, which keeps ring counts
  comparable across snapshot windows.

Both return 1-based labels where label 1 is the group with the highest
values (the most intimate ring).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

BANDWIDTH_FLOOR = 0.05
MAX_ITER = 500
CONVERGENCE_TOL = 1e-6


@dataclass(frozen=True)
class Clustering:
    labels: tuple[int, ...]
    tau: int
    bandwidth: Optional[float] = None
    modes: tuple[float, ...] = ()


def log_transform(values, transform: str = "log1p") -> np.ndarray:
    x = np.asarray(values, dtype=float)
    if transform == "log1p":
        return np.log10(1.0 + x)
    if transform == "log":
        return np.log10(x)
    if transform == "identity":
        return x
    raise ValueError(f"unknown transform {transform!r}")


def silverman_bandwidth(x, floor: float = BANDWIDTH_FLOOR) -> float:
    """Silverman's rule of thumb, clipped from below at ``floor``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        return floor
    sd = x.std(ddof=1)
    q75, q25 = np.percentile(x, [75, 25])
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    return max(floor, 0.9 * spread * n ** (-0.2))


def _shift_to_modes(points: np.ndarray, weights: np.ndarray, h: float,
                    max_iter: int, tol: float) -> np.ndarray:
    modes = points.copy()
    active = np.ones(points.size, dtype=bool)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        cur = modes[idx]
        k = np.exp(-0.5 * ((cur[:, None] - points[None, :]) / h) ** 2) * weights[None, :]
        new = (k @ points) / k.sum(axis=1)
        moved = np.abs(new - cur)
        modes[idx] = new
        active[idx[moved < tol]] = False
    return modes


def _merge_modes(modes: np.ndarray, radius: float) -> np.ndarray:
    """Group sorted mode positions whose neighbours lie within ``radius``."""
    order = np.argsort(modes, kind="stable")
    group = np.empty(modes.size, dtype=int)
    g = 0
    prev = None
    for i in order:
        if prev is not None and modes[i] - prev >= radius:
            g += 1
        group[i] = g
        prev = modes[i]
    return group


def mean_shift_1d(values: Sequence[float], bandwidth: Optional[float] = None, *,
                  transform: str = "log1p", floor: float = BANDWIDTH_FLOOR,
                  max_iter: int = MAX_ITER, tol: float = CONVERGENCE_TOL) -> Clustering:
    """Cluster frequencies with a Gaussian-kernel Mean Shift.

    Values are mapped through ``log10(1 + w)`` (see ``transform``) before
    clustering. Without an explicit ``bandwidth`` Silverman's rule is used on
    the transformed values, floored at ``floor``. Converged modes closer than
    half a bandwidth are merged.
    """
    if bandwidth is not None and bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    raw = np.asarray(values, dtype=float)
    if raw.size == 0:
        raise ValueError("mean_shift_1d needs at least one value")
    if np.any(raw < 0):
        raise ValueError("frequencies must be non-negative")
    x = log_transform(raw, transform)
    h = silverman_bandwidth(x, floor) if bandwidth is None else float(bandwidth)

    uniq, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    modes = _shift_to_modes(uniq, counts.astype(float), h, max_iter, tol)
    group = _merge_modes(modes, h / 2)
    n_groups = int(group.max()) + 1
    centers = np.array([np.average(modes[group == g], weights=counts[group == g])
                        for g in range(n_groups)])

    # Points reaching the same merged mode must form a contiguous run of
    # sorted values; if the shift map broke that, fall back to nearest mode.
    if np.any(np.diff(group) < 0):
        group = np.argmin(np.abs(uniq[:, None] - centers[None, :]), axis=1)
        used = np.unique(group)
        remap = {g: i for i, g in enumerate(used)}
        group = np.array([remap[g] for g in group])
        centers = centers[used]
        n_groups = used.size

    # rank groups by descending centre -> label 1 is the most intimate
    rank = np.empty(n_groups, dtype=int)
    rank[np.argsort(-centers, kind="stable")] = np.arange(1, n_groups + 1)
    labels = rank[group][inverse]
    return Clustering(tuple(int(v) for v in labels), n_groups, h,
                      tuple(float(c) for c in np.sort(centers)[::-1]))


def kpartition_1d(values: Sequence[float], k: int, *, transform: str = "log1p") -> Clustering:
    """Optimal split of ``values`` into at most ``k`` contiguous groups.

    Equal values always share a group. When there are fewer distinct values
    than ``k`` each distinct value gets its own group and the trailing
    (least intimate) labels stay unused.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    raw = np.asarray(values, dtype=float)
    if raw.size == 0:
        return Clustering((), 0)
    x = log_transform(raw, transform)
    uniq, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    m = uniq.size
    if m <= k:
        group = np.arange(m)
    else:
        group = _optimal_split(uniq, counts.astype(float), k)
    n_groups = int(group.max()) + 1
    labels = n_groups - group[inverse]
    return Clustering(tuple(int(v) for v in labels), n_groups)


def _optimal_split(x: np.ndarray, w: np.ndarray, k: int) -> np.ndarray:
    """Weighted 1-D k-means by dynamic programming over sorted ``x``."""
    m = x.size
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cx = np.concatenate([[0.0], np.cumsum(w * x)])
    cxx = np.concatenate([[0.0], np.cumsum(w * x * x)])
    # cost[i, j]: SSE of segment x[i..j] inclusive (upper triangle used)
    i = np.arange(m)[:, None]
    j = np.arange(m)[None, :]
    sw = cw[j + 1] - cw[i]
    sx = cx[j + 1] - cx[i]
    sxx = cxx[j + 1] - cxx[i]
    with np.errstate(divide="ignore", invalid="ignore"):
        cost = sxx - np.where(sw > 0, sx * sx / sw, 0.0)
    cost = np.where(j >= i, np.maximum(cost, 0.0), np.inf)

    best = cost[0].copy()  # best[j]: 1 group covering x[0..j]
    back = np.zeros((k, m), dtype=int)
    for g in range(1, k):
        # new[j] = min_{s<=j} best[s-1] + cost[s, j], s >= g
        prev = np.concatenate([[np.inf], best[:-1]])  # prev[s] = best[s-1]
        total = prev[:, None] + cost
        total[:g] = np.inf
        arg = np.argmin(total, axis=0)
        best = total[arg, np.arange(m)]
        back[g] = arg
    group = np.empty(m, dtype=int)
    end = m - 1
    for g in range(k - 1, -1, -1):
        start = back[g, end] if g > 0 else 0
        group[start:end + 1] = g
        end = start - 1
    return group
