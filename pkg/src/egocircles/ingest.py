"""Reading and writing timeline archives, profile tables and manifests.

Timelines are JSON Lines, one interaction per line::

    {"ego_id": "u1", "alter_id": "u2", "ts": "2017-03-01T10:00:00Z",
     "kind": "reply", "hashtags": ["news"], "id": "r1", "text": "..."}

Profiles are a CSV table with a header row; see ``PROFILE_COLUMNS``.
"""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional

from .model import DEFAULT_CAP, InteractionRecord, Kind, Timeline, UserProfile

log = logging.getLogger(__name__)

PROFILE_COLUMNS = ("user_id", "display_name", "screen_name", "bio_tokens",
                   "follower_count", "registered_at")

_RFC3339 = re.compile(
    r"^(\d{4}-\d{2}-\d{2})[Tt ](\d{2}:\d{2}:\d{2})(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$"
)
_HASHTAG = re.compile(r"#(\w+)")
_KINDS = {k.value: k for k in Kind}


class IngestionError(ValueError):
    """Raised for malformed input files."""


def parse_rfc3339(text: str) -> datetime:
    m = _RFC3339.match(text) if isinstance(text, str) else None
    if not m:
        raise ValueError(f"not an RFC 3339 timestamp: {text!r}")
    date, clock, _fraction, offset = m.groups()
    if offset in ("Z", "z"):
        offset = "+00:00"
    return datetime.fromisoformat(f"{date}T{clock}{offset}").astimezone(timezone.utc)


def format_rfc3339(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def extract_hashtags(text: str) -> list[str]:
    """Lowercased hashtags in order of appearance, duplicates kept."""
    return [tag.lower() for tag in _HASHTAG.findall(text or "")]


@dataclass(frozen=True)
class DatasetManifest:
    dataset_name: str
    timeline_paths: tuple[Path, ...]
    profile_path: Path
    download_time: datetime
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.cap < 1:
            raise IngestionError("manifest cap must be >= 1")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        try:
            raw = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise IngestionError(f"cannot read manifest {path}: {exc}") from exc
        missing = [k for k in ("dataset_name", "timeline_paths", "profile_path", "download_time")
                   if k not in raw]
        if missing:
            raise IngestionError(f"manifest {path} lacks fields: {', '.join(missing)}")
        base = path.parent
        timelines = tuple(base / p for p in raw["timeline_paths"])
        profiles = base / raw["profile_path"]
        absent = [str(p) for p in (*timelines, profiles) if not p.exists()]
        if absent:
            raise IngestionError(f"manifest {path} references missing files: {absent[:5]}")
        try:
            download = parse_rfc3339(raw["download_time"])
        except ValueError as exc:
            raise IngestionError(f"manifest download_time: {exc}") from exc
        return cls(raw["dataset_name"], timelines, profiles, download, int(raw.get("cap", DEFAULT_CAP)))

    def dump(self, path) -> None:
        path = Path(path)
        base = path.parent.resolve()

        def rel(p: Path) -> str:
            p = Path(p).resolve()
            try:
                return str(p.relative_to(base))
            except ValueError:
                return str(p)

        payload = {
            "dataset_name": self.dataset_name,
            "timeline_paths": [rel(p) for p in self.timeline_paths],
            "profile_path": rel(self.profile_path),
            "download_time": format_rfc3339(self.download_time),
            "cap": self.cap,
        }
        path.write_text(json.dumps(payload, indent=2) + "\n")


def record_from_json(obj: Mapping) -> InteractionRecord:
    """Build a record from one decoded line; raises ``ValueError`` on bad fields."""
    rid = str(obj.get("id", ""))
    try:
        kind = _KINDS[str(obj["kind"]).lower()]
    except KeyError:
        raise ValueError(f"record {rid!r}: unknown or missing kind {obj.get('kind')!r}") from None
    alter = obj.get("alter_id")
    if (kind is Kind.INDIRECT) != (alter is None):
        raise ValueError(f"record {rid!r}: kind {kind.value!r} does not match alter_id {alter!r}")
    tags = obj.get("hashtags")
    if tags is None:
        tags = extract_hashtags(obj.get("text", ""))
    else:
        tags = [str(t).lstrip("#").lower() for t in tags]
    return InteractionRecord(
        ego_id=str(obj["ego_id"]),
        alter_id=None if alter is None else str(alter),
        timestamp=parse_rfc3339(obj["ts"]),
        kind=kind,
        hashtags=tuple(tags),
        record_id=rid,
    )


def record_to_json(r: InteractionRecord) -> dict:
    return {"ego_id": r.ego_id, "alter_id": r.alter_id, "ts": format_rfc3339(r.timestamp),
            "kind": r.kind.value, "hashtags": list(r.hashtags), "id": r.record_id}


def iter_records(path) -> Iterator[InteractionRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                if not isinstance(obj, dict):
                    raise ValueError("line is not a JSON object")
                yield record_from_json(obj)
            except (ValueError, KeyError, TypeError) as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from exc


def parse_timeline_file(path, manifest: DatasetManifest,
                        profiles: Optional[Mapping[str, UserProfile]] = None) -> Timeline:
    """Parse one ego's timeline file into a validated :class:`Timeline`.

    Records are stably sorted by timestamp. More records than ``manifest.cap``
    is an error, as is a file mixing several egos.
    """
    records = list(iter_records(path))
    if len(records) > manifest.cap:
        raise IngestionError(f"{path}: {len(records)} records exceed cap {manifest.cap}")
    egos = {r.ego_id for r in records}
    if len(egos) > 1:
        raise IngestionError(f"{path}: records from several egos {sorted(egos)[:3]}")
    ego = egos.pop() if egos else Path(path).stem
    late = [r.record_id for r in records if r.timestamp > manifest.download_time]
    if late:
        raise IngestionError(f"{path}: records after download time, e.g. {late[0]!r}")
    records.sort(key=lambda r: r.timestamp)
    if profiles is None:
        profiles = load_profiles_cached(str(manifest.profile_path))
    profile = profiles.get(ego) or UserProfile(ego)
    return Timeline(profile, tuple(records), manifest.download_time, manifest.cap)


def emit_timeline(t: Timeline, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in t.interactions:
            fh.write(json.dumps(record_to_json(r), separators=(",", ":")) + "\n")


def parse_profiles(path) -> dict[str, UserProfile]:
    """Read the profile table; a repeated ``user_id`` keeps the last row."""
    out: dict[str, UserProfile] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for col in PROFILE_COLUMNS:
            if col not in header:
                raise IngestionError(f"{path}: missing required column {col!r}")
        for lineno, row in enumerate(reader, 2):
            try:
                profile = profile_from_row(row)
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from exc
            if profile.user_id in out:
                log.warning("%s:%d: duplicate user_id %r, keeping the last row",
                            path, lineno, profile.user_id)
            out[profile.user_id] = profile
    return out


def profile_from_row(row: Mapping[str, str]) -> UserProfile:
    bio = row["bio_tokens"] or ""
    reg = (row["registered_at"] or "").strip()
    return UserProfile(
        user_id=row["user_id"],
        display_name=row["display_name"] or "",
        screen_name=row["screen_name"] or "",
        bio_tokens=tuple(t for t in bio.split(";") if t),
        follower_count=int(row["follower_count"]),
        registered_at=parse_rfc3339(reg) if reg else None,
    )


def write_profiles(profiles: Iterable[UserProfile], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PROFILE_COLUMNS)
        for p in profiles:
            w.writerow([p.user_id, p.display_name, p.screen_name, ";".join(p.bio_tokens),
                        p.follower_count, format_rfc3339(p.registered_at) if p.registered_at else ""])


@lru_cache(maxsize=4)
def load_profiles_cached(path: str) -> dict[str, UserProfile]:
    return parse_profiles(path)
