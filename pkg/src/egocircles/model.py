"""Domain types shared by every analysis stage.

All types are immutable after construction. Timestamps are timezone-aware
UTC ``datetime`` objects truncated to whole seconds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import FrozenSet, Optional, Tuple

SECONDS_PER_DAY = 86_400
# Julian year, used for every duration conversion.
DAYS_PER_YEAR = 365.25
SECONDS_PER_YEAR = int(DAYS_PER_YEAR * SECONDS_PER_DAY)  # 31_557_600
SECONDS_PER_MONTH = SECONDS_PER_YEAR // 12  # 2_629_800
ONE_YEAR = timedelta(seconds=SECONDS_PER_YEAR)
ONE_MONTH = timedelta(seconds=SECONDS_PER_MONTH)
DEFAULT_CAP = 3200


class Kind(str, enum.Enum):
    REPLY = "reply"
    MENTION = "mention"
    RETWEET = "retweet"
    INDIRECT = "indirect"

    @property
    def is_direct(self) -> bool:
        return self is not Kind.INDIRECT


KIND_ORDER = (Kind.REPLY, Kind.MENTION, Kind.RETWEET, Kind.INDIRECT)


def utc(dt: datetime) -> datetime:
    """Normalise ``dt`` to an aware UTC datetime at second resolution."""
    if dt.tzinfo is None:
        raise ValueError(f"naive datetime not allowed: {dt!r}")
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def years_between(start: datetime, end: datetime) -> float:
    return (end - start).total_seconds() / SECONDS_PER_YEAR


@dataclass(frozen=True)
class InteractionRecord:
    ego_id: str
    alter_id: Optional[str]
    timestamp: datetime
    kind: Kind
    hashtags: Tuple[str, ...] = ()
    record_id: str = ""

    def __post_init__(self):
        if (self.kind is Kind.INDIRECT) != (self.alter_id is None):
            raise ValueError(
                f"record {self.record_id!r}: kind={self.kind.value} is inconsistent "
                f"with alter_id={self.alter_id!r}"
            )


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    display_name: str = ""
    screen_name: str = ""
    bio_tokens: Tuple[str, ...] = ()
    follower_count: int = 0
    registered_at: Optional[datetime] = None

    def __post_init__(self):
        if self.follower_count < 0:
            raise ValueError(f"user {self.user_id!r}: follower_count must be >= 0")


@dataclass(frozen=True)
class Timeline:
    profile: UserProfile
    interactions: Tuple[InteractionRecord, ...]
    download_time: datetime
    cap: int = DEFAULT_CAP

    @property
    def user_id(self) -> str:
        return self.profile.user_id

    @property
    def first_time(self) -> Optional[datetime]:
        return self.interactions[0].timestamp if self.interactions else None

    @property
    def last_time(self) -> Optional[datetime]:
        return self.interactions[-1].timestamp if self.interactions else None

    @property
    def observed_span(self) -> timedelta:
        if not self.interactions:
            return timedelta(0)
        return self.download_time - self.interactions[0].timestamp

    @property
    def observed_span_years(self) -> float:
        return self.observed_span.total_seconds() / SECONDS_PER_YEAR


def validate_timeline(t: Timeline) -> list[str]:
    """Return a list of invariant violations; empty when ``t`` is valid."""
    problems = []
    recs = t.interactions
    if t.cap < 1:
        problems.append("cap: must be a positive integer")
    if len(recs) > t.cap:
        problems.append("cap exceeded")
    if any(recs[i].timestamp > recs[i + 1].timestamp for i in range(len(recs) - 1)):
        problems.append("interactions not sorted")
    for r in recs:
        if r.ego_id != t.profile.user_id:
            problems.append(f"interactions: record {r.record_id!r} belongs to ego {r.ego_id!r}")
            break
    if recs:
        first = min(r.timestamp for r in recs)
        if t.download_time < first:
            problems.append("observed_span: download_time precedes first interaction")
        if any(r.timestamp > t.download_time for r in recs):
            problems.append("interactions: timestamp after download_time")
    return problems


@dataclass(frozen=True)
class Tie:
    ego_id: str
    alter_id: str
    n_reply: int
    n_mention: int
    n_retweet: int
    first_contact: datetime
    last_contact: datetime
    duration_years: float
    frequency: float
    first_contact_had_hashtag: bool = False
    hashtag_count: int = 0

    @property
    def n_contacts(self) -> int:
        return self.n_reply + self.n_mention + self.n_retweet

    def __post_init__(self):
        if min(self.n_reply, self.n_mention, self.n_retweet) < 0 or self.n_contacts < 1:
            raise ValueError(f"tie {self.ego_id}->{self.alter_id}: needs at least one contact")
        if self.first_contact > self.last_contact:
            raise ValueError(f"tie {self.ego_id}->{self.alter_id}: first_contact after last_contact")
        if self.duration_years <= 0:
            raise ValueError(f"tie {self.ego_id}->{self.alter_id}: duration must be positive")


@dataclass(frozen=True)
class CircleStructure:
    ego_id: str
    tau: int
    ring_members: Tuple[FrozenSet[str], ...]
    circle_sizes: Tuple[int, ...]
    scaling_ratios: Tuple[float, ...]
    # frequency per alter, kept so ring ordering can be checked
    frequencies: dict = field(default_factory=dict, compare=False, repr=False)
    bandwidth: Optional[float] = None
    degenerate: bool = False

    @classmethod
    def from_rings(cls, ego_id, rings, frequencies=None, bandwidth=None, degenerate=False):
        rings = tuple(frozenset(r) for r in rings)
        sizes, total = [], 0
        for r in rings:
            total += len(r)
            sizes.append(total)
        ratios = tuple(sizes[i] / sizes[i - 1] for i in range(1, len(sizes)))
        return cls(ego_id, len(rings), rings, tuple(sizes), ratios,
                   dict(frequencies or {}), bandwidth, degenerate)

    def ring_of(self) -> dict[str, int]:
        """Map alter id to its 1-based ring index."""
        return {a: i + 1 for i, ring in enumerate(self.ring_members) for a in ring}

    @property
    def active_size(self) -> int:
        return self.circle_sizes[-1] if self.circle_sizes else 0


@dataclass(frozen=True)
class Snapshot:
    window_start: datetime
    rings: Tuple[FrozenSet[str], ...]


@dataclass(frozen=True)
class SnapshotSeries:
    ego_id: str
    window_length: timedelta
    step: timedelta
    n_rings: int
    snapshots: Tuple[Snapshot, ...]

    def __post_init__(self):
        starts = [s.window_start for s in self.snapshots]
        if any(b - a != self.step for a, b in zip(starts, starts[1:])):
            raise ValueError("snapshot window starts must differ by exactly one step")
        if any(len(s.rings) != self.n_rings for s in self.snapshots):
            raise ValueError(f"every snapshot needs exactly {self.n_rings} rings")

    @classmethod
    def from_ring_lists(cls, rings_per_window, n_rings, ego_id="ego",
                        step=ONE_YEAR, start=datetime(2010, 1, 1, tzinfo=timezone.utc)):
        snaps = tuple(
            Snapshot(start + i * step, tuple(frozenset(r) for r in rings))
            for i, rings in enumerate(rings_per_window)
        )
        return cls(ego_id, ONE_YEAR, step, n_rings, snaps)


@dataclass(frozen=True)
class EvaluationReport:
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    accuracy: float
    f1: float
    mcc: float

    @classmethod
    def from_counts(cls, tp: int, fp: int, tn: int, fn: int) -> "EvaluationReport":
        def ratio(a, b):
            return a / b if b else 0.0

        precision = ratio(tp, tp + fp)
        recall = ratio(tp, tp + fn)
        accuracy = ratio(tp + tn, tp + fp + tn + fn)
        f1 = ratio(2 * precision * recall, precision + recall)
        return cls(tp, fp, tn, fn, precision, recall, accuracy, f1, matthews(tp, fp, tn, fn))

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in
                ("tp", "fp", "tn", "fn", "precision", "recall", "accuracy", "f1", "mcc")}


def matthews(tp: int, fp: int, tn: int, fn: int) -> float:
    """Matthews correlation coefficient; 0 when any marginal is empty."""
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        return 0.0
    value = (tp * tn - fp * fn) / denom ** 0.5
    return max(-1.0, min(1.0, value))
