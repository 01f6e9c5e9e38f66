"""Small statistics helpers: normal-approximation intervals and Kendall's tau-b."""

from __future__ import annotations

import math
from collections import Counter
from typing import Optional, Sequence

import numpy as np

Z95 = 1.959963984540054


def mean_ci(values: Sequence[float]) -> tuple[float, Optional[float]]:
    """Mean and 95% half-width (normal approximation); half-width is ``None``
    below two observations."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return math.nan, None
    if x.size < 2:
        return float(x[0]), None
    return float(x.mean()), float(Z95 * x.std(ddof=1) / math.sqrt(x.size))


class DegenerateRanking(ValueError):
    pass


def _tie_sums(values) -> tuple[int, int, int]:
    groups = [c for c in Counter(values).values() if c > 1]
    pairs = sum(t * (t - 1) // 2 for t in groups)
    v = sum(t * (t - 1) * (2 * t + 5) for t in groups)
    return pairs, v, sum(t * (t - 1) * (t - 2) for t in groups)


def kendall_s(x: Sequence[float], y: Sequence[float]) -> int:
    """Concordant minus discordant pairs, counted over all O(n^2) pairs."""
    a = np.asarray(x, dtype=float)
    b = np.asarray(y, dtype=float)
    sx = np.sign(a[:, None] - a[None, :])
    sy = np.sign(b[:, None] - b[None, :])
    return int(np.triu(sx * sy, k=1).sum())


def kendall_tau(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Kendall's tau-b and its two-sided p-value.

    The p-value uses the normal approximation of S = C - D with the tie
    corrected variance and a continuity correction of 1.
    """
    if len(x) != len(y):
        raise ValueError("x and y must have the same length")
    n = len(x)
    if n < 2:
        raise ValueError("kendall_tau needs at least two pairs")
    n0 = n * (n - 1) // 2
    tx, vx, wx = _tie_sums(x)
    ty, vy, wy = _tie_sums(y)
    if tx == n0 or ty == n0:
        raise DegenerateRanking("degenerate ranking: all values tied")
    s = kendall_s(x, y)
    tau = s / math.sqrt((n0 - tx) * (n0 - ty))
    tau = max(-1.0, min(1.0, tau))
    return tau, kendall_p_value(s, n, (tx, vx, wx), (ty, vy, wy))


def kendall_p_value(s: int, n: int, x_ties=(0, 0, 0), y_ties=(0, 0, 0)) -> float:
    tx, vx, wx = x_ties
    ty, vy, wy = y_ties
    var = (n * (n - 1) * (2 * n + 5) - vx - vy) / 18.0
    var += (2 * tx) * (2 * ty) / (2.0 * n * (n - 1))
    if n > 2:
        var += wx * wy / (9.0 * n * (n - 1) * (n - 2))
    if var <= 0:
        return 1.0
    z = max(abs(s) - 1, 0) / math.sqrt(var)
    return math.erfc(z / math.sqrt(2.0))
