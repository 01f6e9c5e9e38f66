"""Synthetic timelines with planted ring structure, used as ground truth."""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .ingest import DatasetManifest, format_rfc3339, parse_rfc3339, write_profiles
from .model import (DEFAULT_CAP, SECONDS_PER_YEAR, InteractionRecord, Kind, Timeline,
                    UserProfile)

DEFAULT_START = datetime(2015, 1, 1, tzinfo=timezone.utc)
DIRECT_KINDS = (Kind.REPLY, Kind.MENTION, Kind.RETWEET)
TAG_VOCAB = tuple(f"topic{i}" for i in range(20))
PROCESSES = ("poisson", "regular")


@dataclass(frozen=True)
class PlantedEgoSpec:
    tau: int = 5
    ring_sizes: tuple = (3, 8, 20, 48, 125)
    ring_rates: tuple = (52.0, 24.0, 12.0, 4.0, 1.5)
    span_years: float = 5.0
    type_mix: tuple = (0.2, 0.3, 0.2, 0.3)  # reply, mention, retweet, indirect
    hashtag_prob_first_contact: float = 0.2
    hashtag_rate: float = 0.1
    churn: tuple = (0.0, 0.0, 0.0, 0.0, 0.0)
    seed: int = 0
    process: str = "poisson"
    cap: Optional[int] = None  # None keeps every record
    start: datetime = DEFAULT_START
    ego_id: str = "ego"

    def validate(self) -> None:
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        for name in ("ring_sizes", "ring_rates", "churn"):
            if len(getattr(self, name)) != self.tau:
                raise ValueError(f"{name} needs {self.tau} entries")
        if any(s < 1 for s in self.ring_sizes):
            raise ValueError("ring sizes must be >= 1")
        rates = list(self.ring_rates)
        if any(b >= a for a, b in zip(rates, rates[1:])):
            raise ValueError("ring_rates must be strictly decreasing")
        if rates[-1] < 1:
            raise ValueError("outermost ring rate must be >= 1 contact per year")
        if self.span_years <= 0:
            raise ValueError("span_years must be positive")
        mix = np.asarray(self.type_mix, dtype=float)
        if mix.size != 4 or (mix < 0).any() or not math.isclose(mix.sum(), 1.0, abs_tol=1e-9):
            raise ValueError("type_mix must be 4 non-negative probabilities summing to 1")
        if mix[:3].sum() == 0 or mix[3] >= 1:
            raise ValueError("type_mix needs some direct tweets")
        for name in ("hashtag_prob_first_contact", "hashtag_rate"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must be in [0, 1]")
        if any(not 0 <= c <= 1 for c in self.churn):
            raise ValueError("churn probabilities must be in [0, 1]")
        if self.process not in PROCESSES:
            raise ValueError(f"process must be one of {PROCESSES}")
        if self.cap is not None and self.cap < 1:
            raise ValueError("cap must be >= 1")


@dataclass(frozen=True)
class GroundTruth:
    ego_id: str
    # years[y][i]: alters planted in ring i + 1 during year y of the span
    years: tuple

    def rows(self):
        for y, rings in enumerate(self.years):
            for i, ring in enumerate(rings):
                for alter in sorted(ring):
                    yield self.ego_id, y, i + 1, alter


def _identities(spec: PlantedEgoSpec, rng, n_years: int):
    """Slot -> alter id per year, replacing identities at year boundaries."""
    slot_ring = np.repeat(np.arange(spec.tau), spec.ring_sizes)
    n_slots = slot_ring.size
    ids = np.empty((n_slots, n_years), dtype=np.int64)
    ids[:, 0] = np.arange(n_slots)
    nxt = n_slots
    churn = np.asarray(spec.churn, dtype=float)[slot_ring]
    for y in range(1, n_years):
        swap = rng.random(n_slots) < churn
        ids[:, y] = ids[:, y - 1]
        k = int(swap.sum())
        ids[swap, y] = np.arange(nxt, nxt + k)
        nxt += k
    return slot_ring, ids


def _direct_times(spec: PlantedEgoSpec, rng, slot_ring):
    """Event offsets in years and the slot each belongs to."""
    rates = np.asarray(spec.ring_rates, dtype=float)[slot_ring]
    span = spec.span_years
    if spec.process == "poisson":
        counts = rng.poisson(rates * span)
        slots = np.repeat(np.arange(slot_ring.size), counts)
        return rng.random(slots.size) * span, slots
    # evenly spaced events with a random phase per slot
    phase = rng.random(slot_ring.size) / rates
    counts = np.ceil((span - phase) * rates).astype(int)
    slots = np.repeat(np.arange(slot_ring.size), counts)
    k = np.arange(slots.size) - np.repeat(np.cumsum(counts) - counts, counts)
    times = phase[slots] + k / rates[slots]
    keep = times < span
    return times[keep], slots[keep]


def _draw(spec: PlantedEgoSpec):
    spec.validate()
    rng = np.random.default_rng(spec.seed & 0xFFFFFFFFFFFFFFFF)
    n_years = max(1, math.ceil(spec.span_years))
    slot_ring, ids = _identities(spec, rng, n_years)
    t_dir, slots = _direct_times(spec, rng, slot_ring)
    mix = np.asarray(spec.type_mix, dtype=float)
    kinds = rng.choice(3, size=t_dir.size, p=mix[:3] / mix[:3].sum())
    year = np.minimum(t_dir.astype(int), n_years - 1)
    alters = ids[slots, year]

    direct_rate = float(np.dot(spec.ring_sizes, spec.ring_rates))
    n_ind = rng.poisson(direct_rate * spec.span_years * mix[3] / (1 - mix[3]))
    t_ind = rng.random(n_ind) * spec.span_years
    # an indirect post at the very start anchors windows to the span start
    t_ind = np.concatenate([[0.0], t_ind])

    times = np.concatenate([t_dir, t_ind])
    secs = np.floor(times * SECONDS_PER_YEAR).astype(np.int64)
    alt = np.concatenate([alters, np.full(t_ind.size, -1)])
    kind = np.concatenate([kinds, np.full(t_ind.size, 3)])
    order = np.lexsort((alt, kind, secs))
    secs, alt, kind = secs[order], alt[order], kind[order]

    tagged = rng.random(secs.size) < spec.hashtag_rate
    direct = np.flatnonzero(alt >= 0)
    _, first = np.unique(alt[direct], return_index=True)
    first_idx = direct[first]
    tagged[first_idx] = rng.random(first_idx.size) < spec.hashtag_prob_first_contact
    tag_pick = rng.integers(0, len(TAG_VOCAB), size=secs.size)

    if spec.cap is not None and secs.size > spec.cap:
        keep = slice(secs.size - spec.cap, None)
        secs, alt, kind, tagged, tag_pick = secs[keep], alt[keep], kind[keep], tagged[keep], tag_pick[keep]

    truth = tuple(
        tuple(frozenset(f"{spec.ego_id}-a{a}" for a in ids[slot_ring == i, y]) for i in range(spec.tau))
        for y in range(n_years)
    )
    return secs, alt, kind, tagged, tag_pick, GroundTruth(spec.ego_id, truth)


def generate_ego(spec: PlantedEgoSpec, profile: Optional[UserProfile] = None) -> tuple[Timeline, GroundTruth]:
    """Timeline of one planted ego plus its per-year ring membership."""
    secs, alt, kind, tagged, tag_pick, truth = _draw(spec)
    start = int(spec.start.timestamp())
    download = spec.start + timedelta(seconds=round(spec.span_years * SECONDS_PER_YEAR))
    kinds = (*DIRECT_KINDS, Kind.INDIRECT)
    ego = spec.ego_id
    recs = tuple(
        InteractionRecord(
            ego,
            None if a < 0 else f"{ego}-a{a}",
            datetime.fromtimestamp(start + int(s), tz=timezone.utc),
            kinds[k],
            (TAG_VOCAB[p],) if tg else (),
            f"{ego}-{i}",
        )
        for i, (s, a, k, tg, p) in enumerate(zip(secs.tolist(), alt.tolist(), kind.tolist(),
                                                   tagged.tolist(), tag_pick.tolist()))
    )
    cap = spec.cap if spec.cap is not None else max(DEFAULT_CAP, len(recs) + 1)
    return Timeline(profile or UserProfile(ego), recs, download, cap), truth


# --- datasets ---------------------------------------------------------------

@dataclass(frozen=True)
class DatasetSpec:
    """Population-level knobs; ``ego`` is the template for every ego."""
    ego: PlantedEgoSpec = field(default_factory=PlantedEgoSpec)
    n_egos: int = 50
    seed: int = 0
    cap: int = 100_000
    size_jitter: float = 0.0  # lognormal sd applied to ring sizes per ego
    journalist_fraction: float = 0.4  # among alters
    assortativity: str = "assortative"  # or "independent"
    popularity_noise: float = 0.5
    n_groups: int = 6
    bot_fraction: float = 0.05
    abandoned_fraction: float = 0.0
    sporadic_fraction: float = 0.0

    @classmethod
    def from_json(cls, raw: dict) -> "DatasetSpec":
        raw = dict(raw)
        ego_raw = dict(raw.pop("ego", {}))
        if "start" in ego_raw:
            ego_raw["start"] = parse_rfc3339(ego_raw["start"])
        for key in ("ring_sizes", "ring_rates", "type_mix", "churn"):
            if key in ego_raw:
                ego_raw[key] = tuple(ego_raw[key])
        known = {f.name for f in fields(PlantedEgoSpec)}
        bad = set(ego_raw) - known
        if bad:
            raise ValueError(f"unknown ego spec fields: {sorted(bad)}")
        if "tau" not in ego_raw and "ring_sizes" in ego_raw:
            ego_raw["tau"] = len(ego_raw["ring_sizes"])
        ego = PlantedEgoSpec(**ego_raw)
        known = {f.name for f in fields(cls)}
        bad = set(raw) - known
        if bad:
            raise ValueError(f"unknown dataset spec fields: {sorted(bad)}")
        spec = cls(ego=ego, **raw)
        ego.validate()
        if spec.assortativity not in ("assortative", "independent"):
            raise ValueError("assortativity must be 'assortative' or 'independent'")
        return spec

    def to_json(self) -> dict:
        d = asdict(self)
        d["ego"]["start"] = format_rfc3339(self.ego.start)
        return d


def ego_seed(master: int, index: int) -> int:
    """Independent 64-bit stream seed for ego ``index``."""
    return int(np.random.SeedSequence([master & 0xFFFFFFFFFFFFFFFF, index]).generate_state(1, np.uint64)[0])


def _group_mixes(spec: DatasetSpec) -> list[tuple]:
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed & 0xFFFFFFFFFFFFFFFF, 2**32 - 1]))
    base = np.asarray(spec.ego.type_mix, dtype=float)
    mixes = []
    for _ in range(spec.n_groups):
        m = rng.dirichlet(base * 20 + 0.5)
        m[3] = min(m[3], 0.8)
        mixes.append(tuple(float(v) for v in m / m.sum()))
    return mixes


def _lognormal_followers(rng, size=None, mu=7.0, sigma=1.5):
    return np.maximum(0, np.round(np.exp(rng.normal(mu, sigma, size)))).astype(np.int64)


_KIND_NAMES = ("reply", "mention", "retweet", "indirect")


def _write_jsonl(path, ego: str, start: int, secs, alt, kind, tagged, tag_pick, idx) -> None:
    """Same bytes as ``emit_timeline`` on the equivalent timeline, without
    building record objects."""
    stamps = np.datetime_as_string((start + secs).astype("datetime64[s]"), unit="s")
    with open(path, "w", encoding="utf-8") as fh:
        for ts, a, k, tg, p, i in zip(stamps.tolist(), alt.tolist(), kind.tolist(), tagged.tolist(),
                                      tag_pick.tolist(), idx.tolist()):
            alter = "null" if a < 0 else f'"{ego}-a{a}"'
            tags = f'["{TAG_VOCAB[p]}"]' if tg else "[]"
            fh.write(f'{{"ego_id":"{ego}","alter_id":{alter},"ts":"{ts}Z",'
                     f'"kind":"{_KIND_NAMES[k]}","hashtags":{tags},"id":"{ego}-{i}"}}\n')


def _make_ego(args):
    spec, index, out = args
    ego_id = f"e{index:05d}"
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed & 0xFFFFFFFFFFFFFFFF, index, 1]))
    sizes = spec.ego.ring_sizes
    if spec.size_jitter > 0:
        sizes = tuple(max(1, int(round(s * math.exp(rng.normal(0, spec.size_jitter))))) for s in sizes)
    mixes = _group_mixes(spec)
    group = int(rng.integers(spec.n_groups)) if spec.n_groups else 0
    mix = mixes[group] if spec.n_groups else spec.ego.type_mix
    ego_spec = replace(spec.ego, ring_sizes=sizes, type_mix=mix, seed=ego_seed(spec.seed, index),
                       cap=spec.cap, ego_id=ego_id)
    ego_followers = int(_lognormal_followers(rng))
    is_bot = bool(rng.random() < spec.bot_fraction)
    profile = UserProfile(ego_id, f"Ego {index}", ego_id, ("journalist", "news"), ego_followers,
                          spec.ego.start - timedelta(days=365))
    secs, alt, kind, tagged, tag_pick, truth = _draw(ego_spec)
    idx = np.arange(secs.size)

    fate = rng.random()
    keep = None
    if fate < spec.abandoned_fraction:
        keep = secs <= 0.6 * spec.ego.span_years * SECONDS_PER_YEAR
    elif fate < spec.abandoned_fraction + spec.sporadic_fraction:
        keep = (secs // (30 * 86_400)) % 6 == 0
    if keep is not None:
        secs, alt, kind, tagged, tag_pick, idx = (a[keep] for a in (secs, alt, kind, tagged, tag_pick, idx))

    alters = sorted({a for year in truth.years for ring in year for a in ring})
    ring_of = {}
    for year in truth.years:
        for i, ring in enumerate(year):
            for a in ring:
                ring_of.setdefault(a, i + 1)
    alter_rows = []
    labels = []
    for a in alters:
        journalist = bool(rng.random() < spec.journalist_fraction)
        noise = rng.normal(0, spec.popularity_noise)
        linked = spec.assortativity == "assortative" and (journalist or ring_of[a] <= 2)
        if linked:
            followers = int(round(ego_followers * math.exp(noise)))
        else:
            followers = int(_lognormal_followers(rng))
        bio = ("reporter", "at", "daily") if journalist else ("coffee", "lover")
        alter_rows.append(UserProfile(a, "", a, bio, max(0, followers)))
        labels.append((a, int(journalist)))

    _write_jsonl(Path(out) / "timelines" / f"{ego_id}.jsonl", ego_id, int(spec.ego.start.timestamp()),
                 secs, alt, kind, tagged, tag_pick, idx)
    bot_score = float(rng.uniform(0.6, 1.0) if is_bot else rng.uniform(0.0, 0.4))
    cap_score = float(rng.uniform(0.6, 1.0) if is_bot else rng.uniform(0.0, 0.4))
    return {
        "ego_id": ego_id,
        "profile": profile,
        "alters": alter_rows,
        "labels": labels,
        "truth": list(truth.rows()),
        "group": f"g{group}",
        "is_bot": is_bot,
        "provider": (ego_id, 1, round(bot_score, 4), round(cap_score, 4)),
        "n_records": int(secs.size),
    }


def write_dataset(spec: DatasetSpec, out, jobs: int = 1) -> DatasetManifest:
    """Write timelines, profiles, labels, groups and ground truth under ``out``."""
    out = Path(out)
    (out / "timelines").mkdir(parents=True, exist_ok=True)
    tasks = [(spec, i, str(out)) for i in range(spec.n_egos)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_make_ego, tasks, chunksize=8))
    else:
        results = [_make_ego(t) for t in tasks]

    write_profiles([r["profile"] for r in results] + [a for r in results for a in r["alters"]],
                   out / "profiles.csv")
    _write_csv(out / "ground_truth.csv", ("ego_id", "year", "ring", "alter_id"),
               (row for r in results for row in r["truth"]))
    _write_csv(out / "labels.csv", ("user_id", "is_journalist"),
               [(r["ego_id"], int(not r["is_bot"])) for r in results] + [row for r in results for row in r["labels"]])
    _write_csv(out / "groups.csv", ("user_id", "group"), [(r["ego_id"], r["group"]) for r in results])
    _write_csv(out / "providers.csv", ("user_id", "is_journalist", "bot_score", "cap_score"),
               [r["provider"] for r in results])
    download = spec.ego.start + timedelta(seconds=round(spec.ego.span_years * SECONDS_PER_YEAR))
    manifest = DatasetManifest(
        f"synthetic-{spec.seed}",
        tuple(out / "timelines" / f"{r['ego_id']}.jsonl" for r in results),
        out / "profiles.csv", download, spec.cap,
    )
    manifest.dump(out / "manifest.json")
    (out / "synth_spec.json").write_text(json.dumps(spec.to_json(), indent=2, sort_keys=True) + "\n")
    return manifest


def _write_csv(path, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
