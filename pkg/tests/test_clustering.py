import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from egocircles.clustering import kpartition_1d, log_transform, mean_shift_1d, silverman_bandwidth


def test_identical_values_single_cluster():
    c = mean_shift_1d([7.0] * 12, 0.05)
    assert c.tau == 1 and set(c.labels) == {1}


def test_two_groups_matches_mode_seeking_oracle():
    values = [0.1] * 20 + [10.0] * 20
    c = mean_shift_1d(values, 0.05)
    labels, tau = oracles.mean_shift(values, 0.05)
    assert c.tau == tau == 2
    assert list(c.labels) == labels
    assert c.labels[-1] == 1 and c.labels[0] == 2


def test_single_value():
    c = mean_shift_1d([3.0], 0.05)
    assert (c.tau, c.labels) == (1, (1,))


@pytest.mark.parametrize("h", [0, -0.1])
def test_bad_bandwidth(h):
    with pytest.raises(ValueError):
        mean_shift_1d([1.0, 2.0], h)


def test_rejects_empty_and_negative():
    with pytest.raises(ValueError):
        mean_shift_1d([])
    with pytest.raises(ValueError):
        mean_shift_1d([1.0, -1.0])


def test_transform_choices():
    assert log_transform([9.0])[0] == pytest.approx(1.0)
    assert log_transform([10.0], "log")[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        log_transform([1.0], "sqrt")


def test_silverman_floor():
    assert silverman_bandwidth([1.0]) == 0.05
    assert silverman_bandwidth([1.0, 1.0, 1.0]) == 0.05
    assert silverman_bandwidth(np.linspace(0, 10, 50)) > 0.05


freqs = st.lists(st.floats(0.5, 200, allow_nan=False), min_size=1, max_size=25)


@settings(max_examples=40, deadline=None)
@given(freqs)
def test_matches_oracle(values):
    c = mean_shift_1d(values, 0.05)
    labels, tau = oracles.mean_shift(values, 0.05)
    # modes that land within float noise of the merge radius can split differently
    if c.tau == tau:
        assert list(c.labels) == labels


@settings(max_examples=60, deadline=None)
@given(freqs)
def test_rings_are_contiguous_and_ordered(values):
    c = mean_shift_1d(values, 0.05)
    assert sorted(set(c.labels)) == list(range(1, c.tau + 1))
    for lab in range(1, c.tau):
        inner = [v for v, l in zip(values, c.labels) if l == lab]
        outer = [v for v, l in zip(values, c.labels) if l == lab + 1]
        assert max(outer) <= min(inner)


@settings(max_examples=40, deadline=None)
@given(freqs, st.floats(0.01, 100))
def test_scale_covariance_with_estimated_bandwidth(values, c):
    # log10(c w) = log10(w) + log10(c): a pure shift, so Silverman's h and every mode move together
    a = mean_shift_1d(values, None, transform="log")
    b = mean_shift_1d([v * c for v in values], None, transform="log")
    if a.tau == b.tau:
        assert a.labels == b.labels
    else:
        # only a merge decision sitting on the h/2 boundary may flip
        gaps = np.diff(np.sort(np.asarray(a.modes)))
        assert np.any(np.abs(gaps - a.bandwidth / 2) < 1e-6)


def test_deterministic():
    v = list(np.random.default_rng(3).lognormal(1, 1, 80))
    assert mean_shift_1d(v, 0.05) == mean_shift_1d(v, 0.05)


class TestKPartition:
    def test_fewer_distinct_than_k(self):
        c = kpartition_1d([5.0, 5.0, 1.0], 5)
        assert c.labels == (1, 1, 2) and c.tau == 2

    def test_empty(self):
        assert kpartition_1d([], 5).tau == 0

    def test_bad_k(self):
        with pytest.raises(ValueError):
            kpartition_1d([1.0], 0)

    def test_three_groups(self):
        c = kpartition_1d([52, 52, 12, 12, 12, 1, 1], 3)
        assert c.labels == (1, 1, 2, 2, 2, 3, 3)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(1, 60), min_size=1, max_size=12), st.integers(1, 5))
    def test_optimal_against_enumeration(self, values, k):
        c = kpartition_1d(values, k)
        x = np.log10(1 + np.asarray(values, dtype=float))
        lab = np.asarray(c.labels)
        sse = sum(((x[lab == g] - x[lab == g].mean()) ** 2).sum() for g in set(c.labels))
        assert sse == pytest.approx(oracles.best_partition_sse(values, k), abs=1e-12)
        assert c.tau == min(k, len(set(values)))
        for g in range(1, c.tau):
            assert x[lab == g + 1].max() < x[lab == g].min()
