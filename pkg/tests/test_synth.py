import csv
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egocircles.ingest import DatasetManifest, emit_timeline, parse_timeline_file
from egocircles.model import Kind, validate_timeline
from egocircles.static import active_network, build_ties
from egocircles.synth import (DatasetSpec, PlantedEgoSpec, _draw, _write_jsonl, ego_seed,
                              generate_ego, write_dataset)

SMALL = dict(ring_sizes=(2, 3, 10, 35, 100), ring_rates=(52, 24, 12, 4, 1.5), span_years=3)


def direct_count(t):
    return sum(r.kind is not Kind.INDIRECT for r in t.interactions)


def test_expected_yearly_volume():
    # 2*52 + 3*24 + 10*12 + 35*4 + 100*1.5 = 586 contacts per year
    expected = 2 * 52 + 3 * 24 + 10 * 12 + 35 * 4 + 100 * 1.5
    vols = [direct_count(generate_ego(PlantedEgoSpec(**SMALL, seed=s))[0]) / 3 for s in range(100)]
    assert abs(np.mean(vols) / expected - 1) < 0.05


def test_deterministic():
    a = generate_ego(PlantedEgoSpec(**SMALL, seed=9, churn=(0.1,) * 5))
    b = generate_ego(PlantedEgoSpec(**SMALL, seed=9, churn=(0.1,) * 5))
    assert a == b
    assert generate_ego(PlantedEgoSpec(**SMALL, seed=10))[0] != a[0]


def test_zero_churn_constant_truth():
    _, truth = generate_ego(PlantedEgoSpec(**SMALL, seed=1))
    assert len(truth.years) == 3
    assert all(y == truth.years[0] for y in truth.years)


def test_churn_replaces_identities():
    _, truth = generate_ego(PlantedEgoSpec(**SMALL, seed=1, churn=(1, 1, 1, 1, 1)))
    first, second = truth.years[0], truth.years[1]
    assert all(not (a & b) for a, b in zip(first, second))
    assert [len(r) for r in second] == list(SMALL["ring_sizes"])


@pytest.mark.parametrize("bad", [
    dict(ring_rates=(52, 52, 12, 4, 1.5)),
    dict(ring_rates=(52, 24, 12, 4, 0.5)),
    dict(ring_sizes=(1, 2)),
    dict(type_mix=(0.5, 0.5, 0.5, 0.0)),
    dict(churn=(0, 0, 0, 0, 2)),
    dict(process="bursty"),
])
def test_invalid_spec(bad):
    with pytest.raises(ValueError):
        generate_ego(PlantedEgoSpec(**{**SMALL, **bad}))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**63), st.sampled_from(["poisson", "regular"]),
       st.lists(st.floats(0, 1), min_size=5, max_size=5), st.one_of(st.none(), st.integers(50, 3000)))
def test_generated_timelines_are_valid(seed, process, churn, cap):
    spec = PlantedEgoSpec(ring_sizes=(2, 3, 5, 8, 12), span_years=2.5, seed=seed, process=process,
                          churn=tuple(churn), cap=cap)
    t, _ = generate_ego(spec)
    assert validate_timeline(t) == []
    if cap is not None:
        assert len(t.interactions) <= cap


def test_rate_two_alters_reach_active_network():
    # L_R starts at first contact, so short spans fall below 0.95 (about 0.83 at 2 y, 0.947 at 3 y)
    spec = dict(ring_sizes=(5, 10), ring_rates=(6.0, 2.0), span_years=5, type_mix=(0.3, 0.3, 0.4, 0.0),
                tau=2, churn=(0, 0))
    hits = total = 0
    for s in range(100):
        t, truth = generate_ego(PlantedEgoSpec(**spec, seed=s))
        net = active_network(build_ties(t), t.download_time)
        active = {x.alter_id for x in net.ties}
        ring2 = truth.years[0][1]
        hits += len(ring2 & active)
        total += len(ring2)
    assert hits / total >= 0.95


def test_regular_process_exact_rates():
    t, _ = generate_ego(PlantedEgoSpec(ring_sizes=(1,), ring_rates=(12.0,), churn=(0,), tau=1,
                                       span_years=2, process="regular", type_mix=(1, 0, 0, 0)))
    assert direct_count(t) == 24


def test_fast_writer_matches_emit_timeline(tmp_path):
    spec = PlantedEgoSpec(**SMALL, seed=3, ego_id="e00001", cap=5000)
    t, _ = generate_ego(spec)
    emit_timeline(t, tmp_path / "slow.jsonl")
    secs, alt, kind, tagged, pick, _ = _draw(spec)
    _write_jsonl(tmp_path / "fast.jsonl", "e00001", int(spec.start.timestamp()), secs, alt, kind, tagged,
                 pick, np.arange(secs.size))
    assert (tmp_path / "fast.jsonl").read_bytes() == (tmp_path / "slow.jsonl").read_bytes()


def test_ego_seed_streams_differ():
    assert ego_seed(0, 0) != ego_seed(0, 1) != ego_seed(1, 0)
    assert ego_seed(5, 3) == ego_seed(5, 3)


def test_write_dataset(tmp_path):
    spec = DatasetSpec.from_json({"n_egos": 3, "seed": 4, "ego": SMALL})
    m = write_dataset(spec, tmp_path / "d")
    loaded = DatasetManifest.load(tmp_path / "d" / "manifest.json")
    assert loaded == m and len(m.timeline_paths) == 3
    t = parse_timeline_file(m.timeline_paths[0], m)
    assert validate_timeline(t) == []
    with open(tmp_path / "d" / "ground_truth.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["ring"] for r in rows} == {"1", "2", "3", "4", "5"}
    for name in ("labels.csv", "groups.csv", "providers.csv", "profiles.csv", "synth_spec.json"):
        assert (tmp_path / "d" / name).exists()
    again = DatasetSpec.from_json(json.loads((tmp_path / "d" / "synth_spec.json").read_text()))
    assert again == spec


def test_dataset_spec_rejects_unknown():
    with pytest.raises(ValueError):
        DatasetSpec.from_json({"n_egos": 1, "colour": "red"})
    with pytest.raises(ValueError):
        DatasetSpec.from_json({"ego": {"shape": 1}})
