import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from egocircles.stats import DegenerateRanking, kendall_tau, mean_ci

# frozen from oracles.kendall_tau_b / oracles.kendall_p
NO_TIES = ([1, 2, 3, 4, 5], [2, 1, 4, 3, 5], 0.6, 0.22067136191984688)
WITH_TIES = ([1, 1, 2, 3, 4, 4], [1, 2, 2, 3, 5, 4], 0.8894991799933214, 0.02927601782584185)


@pytest.mark.parametrize("x,y,tau,p", [NO_TIES, WITH_TIES])
def test_frozen_values(x, y, tau, p):
    got_tau, got_p = kendall_tau(x, y)
    assert got_tau == pytest.approx(tau, abs=1e-15)
    assert got_p == pytest.approx(p, rel=1e-12)


def test_perfect_agreement():
    tau, p = kendall_tau(range(10), range(10))
    assert tau == 1.0 and p < 0.001


def test_degenerate():
    with pytest.raises(DegenerateRanking):
        kendall_tau([3, 3, 3], [1, 2, 3])
    with pytest.raises(ValueError):
        kendall_tau([1], [1])
    with pytest.raises(ValueError):
        kendall_tau([1, 2], [1])


samples = st.integers(2, 30).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 6), min_size=n, max_size=n),
    st.lists(st.integers(0, 6), min_size=n, max_size=n)))


def _informative(x, y):
    return len(set(x)) > 1 and len(set(y)) > 1


@settings(max_examples=100, deadline=None)
@given(samples)
def test_matches_pair_enumeration(xy):
    x, y = xy
    if not _informative(x, y):
        return
    tau, p = kendall_tau(x, y)
    assert tau == pytest.approx(oracles.kendall_tau_b(x, y)[0], abs=1e-12)
    assert p == pytest.approx(oracles.kendall_p(x, y), rel=1e-12, abs=1e-15)
    assert -1 <= tau <= 1 and 0 <= p <= 1


@settings(max_examples=60, deadline=None)
@given(samples)
def test_symmetric(xy):
    x, y = xy
    if _informative(x, y):
        assert kendall_tau(x, y) == pytest.approx(kendall_tau(y, x))


@settings(max_examples=60, deadline=None)
@given(samples)
def test_invariant_under_monotone_maps(xy):
    x, y = xy
    if _informative(x, y):
        mapped = [math.exp(v) + 3 for v in x]
        assert kendall_tau(mapped, y) == pytest.approx(kendall_tau(x, y), abs=1e-12)


def test_mean_ci():
    assert mean_ci([4.0]) == (4.0, None)
    m, ci = mean_ci([1.0, 3.0])
    assert m == 2.0 and ci == pytest.approx(1.959963984540054 * np.sqrt(2) / np.sqrt(2))
    assert math.isnan(mean_ci([])[0])
