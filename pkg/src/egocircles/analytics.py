"""Ring-level analytics: hashtag-activated ties, popularity assortativity and
tweet-type profiling."""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .model import KIND_ORDER, CircleStructure, Tie, Timeline, UserProfile
from .stats import Z95, DegenerateRanking, kendall_tau, mean_ci

log = logging.getLogger(__name__)

REPORT_ALPHA = 0.1
DEFAULT_RESTARTS = 50


# --- hashtag activation -----------------------------------------------------

@dataclass(frozen=True)
class RingHashtagStats:
    ring: int
    n_ties: int
    n_activated: int
    pct_activated: float
    pct_ci: Optional[float]
    hashtags_activated: float
    hashtags_activated_ci: Optional[float]
    hashtags_other: float
    hashtags_other_ci: Optional[float]
    freq_activated: float
    freq_activated_ci: Optional[float]
    freq_other: float
    freq_other_ci: Optional[float]


@dataclass(frozen=True)
class HashtagRingStats:
    n_ties: int
    n_activated: int
    pct_activated: float
    rings: tuple[RingHashtagStats, ...]


def _pct_ci(k: int, n: int) -> Optional[float]:
    if n < 2:
        return None
    p = k / n
    return 100.0 * Z95 * math.sqrt(p * (1 - p) / n)


def hashtag_activation_stats(structures: Iterable[CircleStructure], ties: Iterable[Tie]) -> HashtagRingStats:
    """Share of ring members whose first direct contact carried a hashtag.

    Only ties that sit in a ring of their ego's structure are counted, so the
    overall activated count is the sum of the per-ring counts. Percentages are
    pooled over egos.
    """
    index = {(x.ego_id, x.alter_id): x for x in ties}
    by_ring: dict[int, list[Tie]] = defaultdict(list)
    for s in structures:
        for i, ring in enumerate(s.ring_members):
            for alter in sorted(ring):
                tie = index.get((s.ego_id, alter))
                if tie is None:
                    raise ValueError(f"no tie for ring member {s.ego_id}->{alter}")
                by_ring[i + 1].append(tie)
    rows = []
    total = activated = 0
    for ring in sorted(by_ring):
        members = by_ring[ring]
        on = [x for x in members if x.first_contact_had_hashtag]
        off = [x for x in members if not x.first_contact_had_hashtag]
        n, k = len(members), len(on)
        total += n
        activated += k
        ha = mean_ci([x.hashtag_count for x in on])
        ho = mean_ci([x.hashtag_count for x in off])
        fa = mean_ci([x.frequency for x in on])
        fo = mean_ci([x.frequency for x in off])
        rows.append(RingHashtagStats(ring, n, k, 100.0 * k / n, _pct_ci(k, n),
                                     *ha, *ho, *fa, *fo))
    pct = 100.0 * activated / total if total else 0.0
    return HashtagRingStats(total, activated, pct, tuple(rows))


# --- assortativity ----------------------------------------------------------

CATEGORIES = ("journalist", "non-journalist")


@dataclass(frozen=True)
class AssortativityCell:
    ring: int
    category: str
    tau: float
    p_value: float
    n: int

    @property
    def reported(self) -> bool:
        return self.p_value < REPORT_ALPHA


def assortativity_pairs(structures: Iterable[CircleStructure], profiles: Mapping[str, UserProfile],
                        alter_labels: Mapping[str, bool], max_ring: int = 6) -> dict:
    """``{(ring, category): [(ego followers, mean alter followers), ...]}``.

    Egos with no category-matching alters of known popularity in a ring are
    dropped from that cell.
    """
    cells: dict = defaultdict(list)
    for s in sorted(structures, key=lambda s: s.ego_id):
        ego = profiles.get(s.ego_id)
        if ego is None:
            continue
        for i, ring in enumerate(s.ring_members[:max_ring]):
            for cat in CATEGORIES:
                want = cat == "journalist"
                counts = [profiles[a].follower_count for a in ring
                          if a in alter_labels and alter_labels[a] == want and a in profiles]
                if counts:
                    cells[(i + 1, cat)].append((ego.follower_count, sum(counts) / len(counts)))
    return cells


def assortativity_by_ring(structures: Iterable[CircleStructure], profiles: Mapping[str, UserProfile],
                          alter_labels: Mapping[str, bool], max_ring: int = 6) -> list[AssortativityCell]:
    """Kendall correlation between ego popularity and mean alter popularity,
    per ring and alter category. Cells with fewer than two egos or a fully
    tied ranking are omitted."""
    cells = assortativity_pairs(structures, profiles, alter_labels, max_ring)
    out = []
    for (ring, cat) in sorted(cells, key=lambda c: (c[0], CATEGORIES.index(c[1]))):
        pairs = cells[(ring, cat)]
        if len(pairs) < 2:
            continue
        x, y = zip(*pairs)
        try:
            tau, p = kendall_tau(x, y)
        except DegenerateRanking:
            log.info("ring %d %s: degenerate ranking, cell omitted", ring, cat)
            continue
        out.append(AssortativityCell(ring, cat, tau, p, len(pairs)))
    return out


# --- tweet type profiles ----------------------------------------------------

@dataclass(frozen=True)
class TypeProfile:
    group: str
    percentages: tuple[float, float, float, float]  # reply, mention, retweet, indirect
    n_tweets: int = 0
    n_users: int = 0


def type_counts(t: Timeline) -> np.ndarray:
    slot = {k: i for i, k in enumerate(KIND_ORDER)}
    out = np.zeros(4, dtype=np.int64)
    for r in t.interactions:
        out[slot[r.kind]] += 1
    return out


def tweet_type_profiles(timelines: Iterable[Timeline] | Mapping[str, Sequence[int]],
                        grouping: Mapping[str, str]) -> list[TypeProfile]:
    """Pooled percentage of replies, mentions, retweets and indirect posts per group.

    ``timelines`` may also be a ready-made ``{user_id: [reply, mention,
    retweet, indirect]}`` count map. Users without a group are ignored.
    """
    if isinstance(timelines, Mapping):
        per_user = {u: np.asarray(c, dtype=np.int64) for u, c in timelines.items()}
    else:
        per_user = {t.user_id: type_counts(t) for t in timelines}
    pooled: dict[str, np.ndarray] = {}
    members: dict[str, int] = defaultdict(int)
    for uid in sorted(per_user):
        group = grouping.get(uid)
        if group is None:
            continue
        pooled[group] = pooled.get(group, np.zeros(4, dtype=np.int64)) + per_user[uid]
        members[group] += 1
    out = []
    for group in sorted(pooled):
        counts = pooled[group]
        n = int(counts.sum())
        if n == 0:
            log.warning("group %r has no tweets, skipped", group)
            continue
        out.append(TypeProfile(group, tuple(float(c) * 100.0 / n for c in counts), n, members[group]))
    return out


# --- k-means, silhouette, PCA -----------------------------------------------

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Tiny deterministic PRNG; enough for picking k-means seeds."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        return self.next() % n


def standardize(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    sd = X.std(axis=0)
    return (X - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0)


def _sqdist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


@dataclass
class KMeansRun:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    history: list  # objective after every assignment step


def kmeans_once(X: np.ndarray, k: int, first: int, max_iter: int = 300) -> KMeansRun:
    """Lloyd iterations from farthest-point seeds starting at row ``first``."""
    idx = [first]
    d = _sqdist(X, X[[first]]).ravel()
    for _ in range(1, k):
        nxt = int(np.argmax(d))
        idx.append(nxt)
        d = np.minimum(d, _sqdist(X, X[[nxt]]).ravel())
    centers = X[idx].copy()
    history = []
    labels = None
    for _ in range(max_iter):
        dist = _sqdist(X, centers)
        new = dist.argmin(axis=1)
        history.append(float(dist[np.arange(len(X)), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            mask = labels == j
            if mask.any():  # an emptied cluster keeps its old centre
                centers[j] = X[mask].mean(axis=0)
    return KMeansRun(labels, centers, history[-1], history)


def kmeans(X, k: int, seed: int = 0, restarts: int = DEFAULT_RESTARTS) -> KMeansRun:
    X = np.asarray(X, dtype=float)
    if not 1 <= k <= len(X):
        raise ValueError(f"k={k} outside 1..{len(X)}")
    rng = SplitMix64(seed)
    best = None
    for _ in range(restarts):
        run = kmeans_once(X, k, rng.below(len(X)))
        if best is None or run.inertia < best.inertia - 1e-12:
            best = run
    return best


def silhouette_samples(X, labels) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels)
    D = np.sqrt(_sqdist(X, X))
    ids = np.unique(labels)
    if ids.size < 2:
        raise ValueError("silhouette needs at least two clusters")
    s = np.zeros(len(X))
    for i in range(len(X)):
        own = labels == labels[i]
        if own.sum() == 1:
            continue  # singleton clusters score 0
        a = D[i, own].sum() / (own.sum() - 1)
        b = min(D[i, labels == c].mean() for c in ids if c != labels[i])
        m = max(a, b)
        s[i] = 0.0 if m == 0 else (b - a) / m
    return s


def silhouette_score(X, labels) -> float:
    return float(silhouette_samples(X, labels).mean())


def pca_2d(X) -> np.ndarray:
    """Projection on the two leading covariance eigenvectors.

    Each axis is oriented so its largest-magnitude loading is positive.
    """
    X = np.asarray(X, dtype=float)
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / max(len(X) - 1, 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1][:2]
    V = vecs[:, order]
    for j in range(V.shape[1]):
        if V[np.argmax(np.abs(V[:, j])), j] < 0:
            V[:, j] = -V[:, j]
    coords = Xc @ V
    if coords.shape[1] < 2:
        coords = np.hstack([coords, np.zeros((len(X), 2 - coords.shape[1]))])
    return coords


@dataclass(frozen=True)
class ProfileClustering:
    groups: tuple[str, ...]
    k: int
    labels: tuple[int, ...]
    coords: tuple[tuple[float, float], ...]
    silhouette: Optional[float]
    scores: dict  # k -> mean silhouette
    degenerate: bool = False


def cluster_profiles(profiles: Sequence[TypeProfile], k_range: Iterable[int] = range(2, 7),
                     seed: int = 0, restarts: int = DEFAULT_RESTARTS) -> ProfileClustering:
    """k-means on standardised type vectors with k chosen by mean silhouette."""
    if len(profiles) < 3:
        raise ValueError("cluster_profiles needs at least 3 profiles")
    groups = tuple(p.group for p in profiles)
    Z = standardize([p.percentages for p in profiles])
    coords = pca_2d(Z)
    coords_t = tuple((float(a), float(b)) for a, b in coords)
    n_distinct = len({tuple(row) for row in np.round(Z, 12)})
    if n_distinct < 2:
        return ProfileClustering(groups, 1, (0,) * len(profiles), coords_t, None, {}, True)
    scores = {}
    best = None
    for k in k_range:
        if not 2 <= k <= min(len(profiles) - 1, n_distinct):
            continue
        run = kmeans(Z, k, seed, restarts)
        if np.unique(run.labels).size < 2:
            continue
        score = silhouette_score(Z, run.labels)
        scores[k] = score
        if best is None or score > best[0] + 1e-12:
            best = (score, k, run)
    if best is None:
        return ProfileClustering(groups, 1, (0,) * len(profiles), coords_t, None, scores, True)
    score, k, run = best
    return ProfileClustering(groups, k, tuple(int(l) for l in run.labels), coords_t, score, scores)
