"""Static ego networks: tie weights, the active-tie filter and circles."""

from __future__ import annotations

import statistics
from collections import Counter, defaultdict
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .clustering import BANDWIDTH_FLOOR, mean_shift_1d
from .model import CircleStructure, Kind, Tie, Timeline, years_between
from .stats import mean_ci

MIN_FREQUENCY = 1.0  # contacts per year
MIN_DURATION_YEARS = 1.0
DEFAULT_BANDWIDTH = 0.05

Bandwidth = Union[float, str, None]


@dataclass(frozen=True)
class ActiveNetwork:
    ego_id: str
    ties: tuple[Tie, ...]
    reference_time: datetime
    total_alters: int = 0


def build_ties(t: Timeline, reference_time: Optional[datetime] = None) -> list[Tie]:
    """Aggregate the direct interactions of a timeline into one tie per alter.

    The tie frequency is the number of direct contacts divided by the years
    elapsed from the first contact to ``reference_time`` (download time by
    default).
    """
    ref = reference_time or t.download_time
    if t.interactions and ref < t.interactions[-1].timestamp:
        raise ValueError("reference_time precedes the last interaction")
    counts: dict[str, list[int]] = defaultdict(lambda: [0, 0, 0])
    first: dict[str, object] = {}
    last: dict[str, object] = {}
    opening_tags: dict[str, bool] = {}
    tag_total: Counter = Counter()
    slot = {Kind.REPLY: 0, Kind.MENTION: 1, Kind.RETWEET: 2}
    for r in t.interactions:
        if r.kind is Kind.INDIRECT:
            continue
        a = r.alter_id
        counts[a][slot[r.kind]] += 1
        if a not in first:
            first[a] = r.timestamp
            opening_tags[a] = bool(r.hashtags)
        last[a] = r.timestamp
        tag_total[a] += len(r.hashtags)
    ties = []
    for a in sorted(counts):
        n_reply, n_mention, n_retweet = counts[a]
        duration = years_between(first[a], ref)
        if duration <= 0:
            # contact at the reference instant; one second keeps w finite
            duration = 1.0 / (365.25 * 86400)
        ties.append(Tie(t.user_id, a, n_reply, n_mention, n_retweet, first[a], last[a],
                        duration, (n_reply + n_mention + n_retweet) / duration,
                        opening_tags[a], tag_total[a]))
    return ties


def active_network(ties: Sequence[Tie], reference_time: datetime,
                   min_frequency: float = MIN_FREQUENCY,
                   min_duration: float = MIN_DURATION_YEARS, ego_id: str = "") -> ActiveNetwork:
    ego = ties[0].ego_id if ties else ego_id
    kept = tuple(x for x in ties if x.duration_years >= min_duration and x.frequency >= min_frequency)
    return ActiveNetwork(ego, kept, reference_time, len(ties))


def extract_circles(net: ActiveNetwork, bandwidth: Bandwidth = DEFAULT_BANDWIDTH, *,
                    transform: str = "log1p", floor: float = BANDWIDTH_FLOOR) -> CircleStructure:
    """Cluster active tie frequencies into rings, most intimate first.

    ``bandwidth`` is a number (log10 units), ``"silverman"`` or ``None``
    (both meaning Silverman's rule with ``floor``).
    """
    freqs = {x.alter_id: x.frequency for x in net.ties}
    if len(net.ties) < 2:
        rings = [set(freqs)] if freqs else []
        return CircleStructure.from_rings(net.ego_id, rings, freqs, degenerate=True)
    h = None if bandwidth in (None, "silverman") else float(bandwidth)
    alters = [x.alter_id for x in net.ties]
    clusters = mean_shift_1d([x.frequency for x in net.ties], h, transform=transform, floor=floor)
    rings = [set() for _ in range(clusters.tau)]
    for alter, label in zip(alters, clusters.labels):
        rings[label - 1].add(alter)
    return CircleStructure.from_rings(net.ego_id, rings, freqs, bandwidth=clusters.bandwidth)


def ego_circles(t: Timeline, bandwidth: Bandwidth = DEFAULT_BANDWIDTH,
                reference_time: Optional[datetime] = None, **kw) -> tuple[ActiveNetwork, CircleStructure]:
    ref = reference_time or t.download_time
    net = active_network(build_ties(t, ref), ref, ego_id=t.user_id)
    return net, extract_circles(net, bandwidth, **kw)


@dataclass(frozen=True)
class CohortSummary:
    tau: int
    n_egos: int
    size_mean: tuple[float, ...]
    size_ci: tuple[Optional[float], ...]
    ratio_mean: tuple[float, ...]
    ratio_ci: tuple[Optional[float], ...]


@dataclass(frozen=True)
class PopulationSummary:
    n_egos: int
    active_size_mean: float
    active_size_ci: Optional[float]
    tau_mode: int
    tau_mean: float
    tau_median: float
    tau_counts: dict
    cohorts: dict  # tau -> CohortSummary


def population_summary(structures: Iterable[CircleStructure]) -> PopulationSummary:
    """Aggregate circle structures; confidence half-widths are 95% normal
    approximations and ``None`` for single-ego groups."""
    structures = [s for s in structures if s.tau > 0]
    if not structures:
        raise ValueError("population_summary needs at least one non-empty structure")
    sizes = [s.active_size for s in structures]
    taus = [s.tau for s in structures]
    counts = Counter(taus)
    top = max(counts.values())
    size_mean, size_ci = mean_ci(sizes)
    cohorts = {}
    for tau in sorted(counts):
        group = [s for s in structures if s.tau == tau]
        per_circle = [mean_ci([s.circle_sizes[i] for s in group]) for i in range(tau)]
        per_ratio = [mean_ci([s.scaling_ratios[i] for s in group]) for i in range(tau - 1)]
        cohorts[tau] = CohortSummary(
            tau, len(group),
            tuple(m for m, _ in per_circle), tuple(c for _, c in per_circle),
            tuple(m for m, _ in per_ratio), tuple(c for _, c in per_ratio),
        )
    return PopulationSummary(
        len(structures), size_mean, size_ci,
        min(t for t, c in counts.items() if c == top),
        float(np.mean(taus)), float(statistics.median(taus)),
        dict(sorted(counts.items())), cohorts,
    )
