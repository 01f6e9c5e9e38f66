"""User-level filters applied before any ego network is built."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from sklearn.cluster import DBSCAN

from .model import SECONDS_PER_DAY, SECONDS_PER_YEAR, Timeline

log = logging.getLogger(__name__)

SIX_MONTHS_DAYS = 182.625
REGULARITY_BIN_DAYS = 3
REGULARITY_THRESHOLD = 0.5
DBSCAN_EPS = 0.5
DBSCAN_MIN_PTS = 4
MIN_SPAN_YEARS = 1.0


class Observability(str, enum.Enum):
    FULLY_OBSERVED = "fully_observed"
    PARTIALLY_OBSERVED = "partially_observed"


class Engagement(str, enum.Enum):
    ACTIVE = "active"
    ABANDONED = "abandoned"


class Regularity(str, enum.Enum):
    REGULAR = "regular"
    SPORADIC = "sporadic"


@dataclass(frozen=True)
class UserActivityLabel:
    user_id: str
    observability: Observability
    engagement: Engagement
    regularity: Regularity
    outlier: bool
    observed_span_years: float

    @property
    def retained(self) -> bool:
        return (self.engagement is Engagement.ACTIVE
                and self.regularity is Regularity.REGULAR
                and not self.outlier
                and self.observed_span_years >= MIN_SPAN_YEARS)


def classify_observability(t: Timeline) -> Observability:
    if not t.interactions:
        raise ValueError(f"timeline of {t.user_id!r} is empty")
    if len(t.interactions) >= t.cap:
        return Observability.PARTIALLY_OBSERVED
    return Observability.FULLY_OBSERVED


@dataclass(frozen=True)
class AbandonmentCheck:
    engagement: Engagement
    inactive_days: float
    threshold_days: float
    insufficient_history: bool = False


def abandonment_check(t: Timeline, grace_days: float = SIX_MONTHS_DAYS) -> AbandonmentCheck:
    """Compare the trailing silence with six months plus the longest gap."""
    recs = t.interactions
    if len(recs) < 2:
        inactive = (t.download_time - recs[-1].timestamp).total_seconds() / SECONDS_PER_DAY if recs else math.inf
        log.warning("%s: insufficient history for abandonment check", t.user_id)
        return AbandonmentCheck(Engagement.ABANDONED, inactive, math.nan, True)
    times = np.array([r.timestamp.timestamp() for r in recs])
    max_gap_days = float(np.max(np.diff(times))) / SECONDS_PER_DAY
    inactive = (t.download_time.timestamp() - times[-1]) / SECONDS_PER_DAY
    threshold = grace_days + max_gap_days
    verdict = Engagement.ABANDONED if inactive > threshold else Engagement.ACTIVE
    return AbandonmentCheck(verdict, inactive, threshold)


def detect_abandonment(t: Timeline, grace_days: float = SIX_MONTHS_DAYS) -> Engagement:
    return abandonment_check(t, grace_days).engagement


def regular_bin_fraction(t: Timeline, bin_days: float = REGULARITY_BIN_DAYS) -> float:
    """Fraction of consecutive ``bin_days`` bins, from the first tweet to the
    download time, that hold at least one tweet."""
    span = t.observed_span.total_seconds()
    if span <= 0:
        raise ValueError(f"timeline of {t.user_id!r} has no observed span")
    width = bin_days * SECONDS_PER_DAY
    n_bins = max(1, math.ceil(span / width))
    t0 = t.interactions[0].timestamp
    offsets = np.array([(r.timestamp - t0).total_seconds() for r in t.interactions])
    idx = np.minimum((offsets // width).astype(int), n_bins - 1)
    return np.unique(idx).size / n_bins


def classify_regularity(t: Timeline, bin_days: float = REGULARITY_BIN_DAYS,
                        threshold: float = REGULARITY_THRESHOLD) -> Regularity:
    if regular_bin_fraction(t, bin_days) >= threshold:
        return Regularity.REGULAR
    return Regularity.SPORADIC


def activity_features(t: Timeline) -> tuple[float, float]:
    """(observed span in days, mean tweets per day)."""
    span_days = t.observed_span.total_seconds() / SECONDS_PER_DAY
    rate = len(t.interactions) / span_days if span_days > 0 else float(len(t.interactions))
    return span_days, rate


def dbscan_noise(features: np.ndarray, eps: float = DBSCAN_EPS,
                 min_pts: int = DBSCAN_MIN_PTS) -> np.ndarray:
    """Boolean noise mask from DBSCAN on column-standardised ``features``."""
    X = np.asarray(features, dtype=float)
    if X.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    sd = X.std(axis=0)
    Z = (X - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0)
    labels = DBSCAN(eps=eps, min_samples=min_pts).fit(Z).labels_
    return labels == -1


def detect_frequency_outliers(timelines: Iterable[Timeline] | Mapping[str, tuple[float, float]],
                              eps: float = DBSCAN_EPS, min_pts: int = DBSCAN_MIN_PTS) -> set[str]:
    """User ids flagged as noise by DBSCAN on (span, tweets/day).

    Accepts timelines or a precomputed ``{user_id: (span_days, rate)}`` map.
    """
    if isinstance(timelines, Mapping):
        feats = dict(timelines)
    else:
        feats = {t.user_id: activity_features(t) for t in timelines}
    if len(feats) < 2:
        raise ValueError("outlier detection needs at least two users")
    ids = sorted(feats)
    noise = dbscan_noise(np.array([feats[i] for i in ids]), eps, min_pts)
    return {uid for uid, flag in zip(ids, noise) if flag}


def weekly_counts(t: Timeline) -> np.ndarray:
    """Tweets per week from the first tweet up to the download time."""
    if not t.interactions:
        return np.zeros(0)
    week = 7 * SECONDS_PER_DAY
    t0 = t.interactions[0].timestamp
    n_weeks = max(1, math.ceil(t.observed_span.total_seconds() / week))
    offsets = np.array([(r.timestamp - t0).total_seconds() for r in t.interactions])
    idx = np.minimum((offsets // week).astype(int), n_weeks - 1)
    return np.bincount(idx, minlength=n_weeks).astype(float)


def mean_normalise(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    rng = x.max() - x.min() if x.size else 0.0
    if rng == 0:
        return np.zeros_like(x)
    return (x - x.mean()) / rng


def stationarity_profile(series: Iterable[Timeline | Sequence[float]], weeks: int = 80) -> list[float]:
    """Across-user mean of mean-normalised weekly activity, week by week.

    Items may be timelines (weekly counts are derived) or ready-made weekly
    count sequences.
    """
    rows = []
    for item in series:
        counts = weekly_counts(item) if isinstance(item, Timeline) else np.asarray(item, float)
        if counts.size:
            rows.append(mean_normalise(counts)[:weeks])
    if not rows:
        return []
    horizon = max(r.size for r in rows)
    sums = np.zeros(horizon)
    n = np.zeros(horizon)
    for r in rows:
        sums[:r.size] += r
        n[:r.size] += 1
    return list(sums / n)


def label_user(t: Timeline, outlier: bool = False, *,
               grace_days: float = SIX_MONTHS_DAYS, bin_days: float = REGULARITY_BIN_DAYS,
               regularity_threshold: float = REGULARITY_THRESHOLD) -> UserActivityLabel:
    span_years = t.observed_span.total_seconds() / SECONDS_PER_YEAR
    regularity = (classify_regularity(t, bin_days, regularity_threshold)
                  if span_years > 0 else Regularity.SPORADIC)
    return UserActivityLabel(
        t.user_id,
        classify_observability(t),
        detect_abandonment(t, grace_days),
        regularity,
        outlier,
        span_years,
    )
