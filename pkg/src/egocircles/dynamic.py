"""Sliding-window snapshots of an ego network and ring turnover indices."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from datetime import timedelta
from typing import Iterable, Optional, Sequence

import numpy as np

from .clustering import kpartition_1d
from .model import (ONE_MONTH, ONE_YEAR, SECONDS_PER_YEAR, Kind, Snapshot, SnapshotSeries,
                    Timeline)
from .stats import mean_ci

MIN_SPAN_YEARS = 2.0
STEPS = {"1m": ONE_MONTH, "12m": ONE_YEAR}


def parse_step(text: str) -> timedelta:
    try:
        return STEPS[text]
    except KeyError:
        raise ValueError(f"step must be one of {sorted(STEPS)}, got {text!r}") from None


def step_name(step: timedelta) -> str:
    for name, value in STEPS.items():
        if value == step:
            return name
    return f"{int(step.total_seconds())}s"


def build_snapshots(t: Timeline, window: timedelta = ONE_YEAR, step: timedelta = ONE_YEAR,
                    n_rings: int = 5, *, min_span_years: float = MIN_SPAN_YEARS,
                    min_frequency: float = 1.0, transform: str = "log1p") -> Optional[SnapshotSeries]:
    """Ring partitions of successive windows, or ``None`` for short timelines.

    Windows open at the first observed tweet and advance by ``step`` while
    they still end by the download time. In each window the frequency of an
    alter is its number of direct contacts per window-year, alters below
    ``min_frequency`` are dropped and the rest are split into exactly
    ``n_rings`` rings by optimal 1-D partitioning.
    """
    if not t.interactions or t.observed_span_years < min_span_years:
        return None
    win = int(window.total_seconds())
    stp = int(step.total_seconds())
    if win <= 0 or stp <= 0:
        raise ValueError("window and step must be positive")
    origin = int(t.interactions[0].timestamp.timestamp())
    end = int(t.download_time.timestamp())

    direct = [r for r in t.interactions if r.kind is not Kind.INDIRECT]
    times = np.array([int(r.timestamp.timestamp()) for r in direct], dtype=np.int64)
    if direct:
        alter_ids, codes = np.unique([r.alter_id for r in direct], return_inverse=True)
    else:
        alter_ids, codes = np.array([], dtype=str), np.array([], dtype=int)
    window_years = win / SECONDS_PER_YEAR

    snaps = []
    start = origin
    while start + win <= end:
        lo, hi = np.searchsorted(times, [start, start + win], side="left")
        rings = [set() for _ in range(n_rings)]
        if hi > lo:
            counts = np.bincount(codes[lo:hi], minlength=alter_ids.size)
            present = np.flatnonzero(counts / window_years >= min_frequency)
            if present.size:
                part = kpartition_1d(counts[present] / window_years, n_rings, transform=transform)
                for idx, label in zip(present, part.labels):
                    rings[label - 1].add(str(alter_ids[idx]))
        opened = t.interactions[0].timestamp + timedelta(seconds=start - origin)
        snaps.append(Snapshot(opened, tuple(frozenset(r) for r in rings)))
        start += stp
    return SnapshotSeries(t.user_id, window, step, n_rings, tuple(snaps))


def _require_pairs(series: SnapshotSeries) -> None:
    if len(series.snapshots) < 2:
        raise ValueError("turnover indices need at least two snapshots")


def jaccard_index(series: SnapshotSeries) -> list[float]:
    """Per-ring mean Jaccard similarity over consecutive snapshot pairs.

    Two empty rings count as identical (1); one empty ring scores 0.
    """
    _require_pairs(series)
    snaps = series.snapshots
    out = []
    for i in range(series.n_rings):
        terms = []
        for a, b in zip(snaps, snaps[1:]):
            ra, rb = a.rings[i], b.rings[i]
            union = len(ra | rb)
            terms.append(1.0 if union == 0 else len(ra & rb) / union)
        out.append(sum(terms) / len(terms))
    return out


def jump_index(series: SnapshotSeries) -> list[float]:
    """Per-ring mean ring distance travelled by the alters of each ring.

    Alters absent from the previous snapshot come from ring ``n + 1``.
    Pairs where the later ring is empty are left out of the average.
    """
    _require_pairs(series)
    n = series.n_rings
    snaps = series.snapshots
    sums = [0.0] * n
    used = [0] * n
    for a, b in zip(snaps, snaps[1:]):
        before = {alter: k + 1 for k, ring in enumerate(a.rings) for alter in ring}
        for i, ring in enumerate(b.rings):
            if not ring:
                continue
            dest = i + 1
            total = sum(abs(before.get(alter, n + 1) - dest) for alter in ring)
            sums[i] += total / len(ring)
            used[i] += 1
    return [s / u if u else 0.0 for s, u in zip(sums, used)]


@dataclass(frozen=True)
class DynamicsReport:
    ego_id: str
    step: timedelta
    n_rings: int
    jaccard: tuple[float, ...]
    jump: tuple[float, ...]
    windows_used: int


def dynamics_report(series: SnapshotSeries) -> DynamicsReport:
    return DynamicsReport(series.ego_id, series.step, series.n_rings,
                          tuple(jaccard_index(series)), tuple(jump_index(series)),
                          len(series.snapshots))


@dataclass(frozen=True)
class RingCurve:
    step: str
    ring: int
    n_egos: int
    jaccard_mean: float
    jaccard_ci: Optional[float]
    jump_mean: float
    jump_ci: Optional[float]


def population_dynamics(reports: Iterable[DynamicsReport]) -> list[RingCurve]:
    """Mean Jaccard and Jump per ring across egos, separately for each step."""
    by_step: dict[str, list[DynamicsReport]] = defaultdict(list)
    for r in reports:
        by_step[step_name(r.step)].append(r)
    curves = []
    for name in sorted(by_step, key=lambda s: STEPS[s].total_seconds() if s in STEPS else 0):
        group = by_step[name]
        n = max(r.n_rings for r in group)
        for i in range(n):
            rows = [r for r in group if r.n_rings > i]
            jm, jc = mean_ci([r.jaccard[i] for r in rows])
            um, uc = mean_ci([r.jump[i] for r in rows])
            curves.append(RingCurve(name, i + 1, len(rows), jm, jc, um, uc))
    return curves
