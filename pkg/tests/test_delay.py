import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arqsched.delay import (
    Bit,
    DelayPmf,
    FeedbackEvent,
    arrivals_at_slot_end,
    freshness_pmf,
    sample_delay,
    sample_delays,
)


@st.composite
def pmfs(draw, max_len=5):
    k = draw(st.integers(1, max_len))
    w = draw(st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k))
    if sum(w) <= 0:
        w[-1] = 1.0
    total = sum(w)
    return DelayPmf(tuple(x / total for x in w))


def test_pmf_validation():
    with pytest.raises(ValueError):
        DelayPmf((0.5, 0.4))
    with pytest.raises(ValueError):
        DelayPmf((1.2, -0.2))
    with pytest.raises(ValueError):
        DelayPmf((0.0,) * 70 + (1.0,))
    assert DelayPmf((0.5, 0.5, 0.0)).d_max == 1
    assert DelayPmf.point(2).probs == (0.0, 0.0, 1.0)


def test_parse_and_normalize():
    assert DelayPmf.parse("1/3,1/3,1/3").probs == pytest.approx((1 / 3,) * 3)
    assert DelayPmf.parse("0.5, 0.5").d_max == 1
    with pytest.raises(ValueError):
        DelayPmf.parse("0.5,0.4")
    with pytest.raises(ValueError):
        DelayPmf.parse("a,b")
    rounded = DelayPmf.normalized((0.5908, 0.3959, 0.0132))
    assert math.fsum(rounded.probs) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(ValueError):
        DelayPmf.normalized((0.5, 0.4))


@given(pmfs())
def test_cdf_sf_monotone(pmf):
    cdf = [pmf.cdf(l) for l in range(-1, pmf.d_max + 3)]
    sf = [pmf.sf(l) for l in range(-1, pmf.d_max + 3)]
    assert all(a <= b + 1e-15 for a, b in zip(cdf, cdf[1:]))
    assert all(a >= b - 1e-15 for a, b in zip(sf, sf[1:]))
    assert pmf.sf(pmf.d_max) == 0.0


def test_sample_delay_points():
    rng = np.random.default_rng(1)
    assert {sample_delay(DelayPmf((1.0,)), rng) for _ in range(100)} == {0}
    assert {sample_delay(DelayPmf((0.0, 1.0)), rng) for _ in range(100)} == {1}


def test_sample_delay_frequencies():
    pmf = DelayPmf.parse("1/3,1/3,1/3")
    rng = np.random.default_rng(7)
    n = 10**6
    draws = sample_delays(pmf, n, rng)
    freq = np.bincount(draws, minlength=3) / n
    assert np.all(np.abs(freq - 1 / 3) <= 0.002)
    # the scalar sampler agrees on a smaller run
    rng = np.random.default_rng(8)
    scalar = np.bincount([sample_delay(pmf, rng) for _ in range(60000)], minlength=3) / 60000
    assert np.all(np.abs(scalar - 1 / 3) <= 0.01)


def test_freshness_examples():
    pmf = DelayPmf.parse("1/3,1/3,1/3")
    assert freshness_pmf(pmf, 0) == {None: 1.0}
    law = freshness_pmf(pmf, 5)
    assert law[0] == pytest.approx(1 / 3)
    assert law[1] == pytest.approx(4 / 9)
    assert law[2] == pytest.approx(2 / 9)
    assert law[None] == pytest.approx(0.0, abs=1e-15)
    law = freshness_pmf(DelayPmf((0.0, 1.0)), 3)
    assert law[0] == 0.0 and law[1] == 1.0 and law[2] == 0.0 and law[None] == 0.0


@given(pmfs(), st.integers(0, 100))
def test_freshness_mass(pmf, elapsed):
    law = freshness_pmf(pmf, elapsed)
    assert math.fsum(law.values()) == pytest.approx(1.0, abs=1e-12)
    if elapsed > pmf.d_max:
        assert law[None] == 0.0
        assert all(w == 0.0 for l, w in law.items() if l is not None and l > pmf.d_max)


def test_freshness_matches_simulation():
    # one feedback per slot; newest arrival's age after `elapsed` slots
    pmf = DelayPmf((0.2, 0.5, 0.3))
    elapsed, n = 4, 200_000
    rng = np.random.default_rng(11)
    d = sample_delays(pmf, (n, elapsed), rng)
    # slot s (0 = first) is heard by the end of slot elapsed-1 iff s + d <= elapsed - 1
    heard = np.arange(elapsed)[None, :] + d <= elapsed - 1
    newest = np.where(heard.any(axis=1), elapsed - 1 - np.where(heard, np.arange(elapsed), -1).max(axis=1), -1)
    law = freshness_pmf(pmf, elapsed)
    for key, want in law.items():
        got = np.mean(newest == (-1 if key is None else key))
        sigma = math.sqrt(max(want * (1 - want), 1e-12) / n)
        assert abs(got - want) <= 3 * sigma + 1e-12


def test_arrivals():
    assert arrivals_at_slot_end([], 5) == ([], [])
    ev = FeedbackEvent(0, 6, Bit.ACK)
    arrived, rest = arrivals_at_slot_end([(ev, 0)], 5)
    assert arrived[0].arrival_slot == 5 and arrived[0].delay == 1 and rest == []
    ev2 = FeedbackEvent(1, 5, Bit.NACK)
    arrived, rest = arrivals_at_slot_end([(ev, 0), (ev2, 2)], 5)
    assert [a.user for a in arrived] == [0]
    assert rest == [(ev2, 1)]
    with pytest.raises(ValueError):
        arrivals_at_slot_end([(ev, -1)], 5)
