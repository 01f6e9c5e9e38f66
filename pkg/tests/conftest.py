import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from egocircles.model import InteractionRecord, Kind, Timeline, UserProfile  # noqa: E402

T0 = datetime(2020, 1, 1, tzinfo=timezone.utc)


def rec(alter, at, kind=None, tags=(), ego="ego", rid=""):
    if kind is None:
        kind = Kind.INDIRECT if alter is None else Kind.REPLY
    if not isinstance(at, datetime):
        at = T0 + timedelta(days=at)
    return InteractionRecord(ego, alter, at, Kind(kind), tuple(tags), rid)


def make_timeline(records, download=None, cap=3200, ego="ego", followers=0):
    records = tuple(sorted(records, key=lambda r: r.timestamp))
    if download is None:
        download = records[-1].timestamp if records else T0
    elif not isinstance(download, datetime):
        download = T0 + timedelta(days=download)
    return Timeline(UserProfile(ego, follower_count=followers), records, download, cap)


@pytest.fixture
def t0():
    return T0


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
