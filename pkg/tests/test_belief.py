import numpy as np
import pytest

from arqsched.belief import (
    AlphaPolicy,
    BeliefTracker,
    FixedUserPolicy,
    GenieFeedback,
    GenieTracker,
    GreedyPolicy,
    QueueGreedyPolicy,
    RandomPolicy,
    ScheduleOrderVector,
    argmax_lowest,
    greedy_decide_argmax,
    make_policy,
    order_vector_decide,
    order_vector_update,
    update_beliefs,
)
from arqsched.channel import ChannelParams
from arqsched.delay import Bit, DelayPmf, FeedbackEvent
from arqsched.evaluation.montecarlo import sample_batch, batch_rng, simulate_episode
from arqsched.system import SystemConfig

PRM = ChannelParams(0.8, 0.2)


def ev(user, k, bit, arrival=None):
    return FeedbackEvent(user, k, Bit(bit), arrival)


def test_update_examples():
    tr = BeliefTracker(10, PRM, [0.5, 0.5])
    assert update_beliefs(tr, []).beliefs(10) == tr.beliefs(10)
    tr2 = update_beliefs(tr, [ev(0, 7, 1)])
    assert tr2.belief(0, 5) == pytest.approx(0.68)
    # the original is untouched
    assert tr.latest(0) is None


def test_stale_bit_ignored():
    tr = BeliefTracker(10, PRM, [0.5])
    tr.update([ev(0, 5, 1)])
    tr.update([ev(0, 6, 0)])
    assert tr.latest(0) == (Bit.ACK, 5)
    assert tr.belief(0, 3) == pytest.approx(0.68)


def test_unknown_user_rejected():
    tr = BeliefTracker(10, PRM, [0.5])
    with pytest.raises(IndexError):
        tr.update([ev(3, 5, 1)])


def test_never_observed_belief_evolves():
    tr = BeliefTracker(6, PRM, [0.0])
    assert tr.belief(0, 6) == 0.0
    assert tr.belief(0, 4) == pytest.approx(0.32)


def test_argmax_examples():
    assert argmax_lowest([0.3, 0.7, 0.5]) == 1
    assert argmax_lowest([0.4, 0.4]) == 0
    t = 5
    tr = BeliefTracker(10, PRM, [0.5, 0.5])
    tr.update([ev(0, t + 1, 0), ev(1, t + 3, 1)])
    assert tr.beliefs(t) == pytest.approx([0.2, 0.608])
    assert greedy_decide_argmax(tr, t) == 1


def test_order_vector_decide_examples():
    assert order_vector_decide(ScheduleOrderVector([(2, 5), (0, 8)], [1], [])) == 2
    assert order_vector_decide(ScheduleOrderVector([], [1, 3], [(0, 9)])) == 1
    assert order_vector_decide(ScheduleOrderVector([], [], [(0, 9), (1, 4)])) == 0


def test_order_vector_rejects_nonpositive_correlation():
    with pytest.raises(ValueError):
        ScheduleOrderVector.initial([0.5, 0.5], ChannelParams(0.3, 0.3))
    with pytest.raises(ValueError):
        ScheduleOrderVector.initial([0.5, 0.5], ChannelParams(0.2, 0.6))


def test_order_vector_update():
    osv = ScheduleOrderVector.initial([0.2, 0.6, 0.4], PRM)
    assert osv.combined() == [1, 2, 0]
    # newest possible ACK goes to the head of A
    osv = order_vector_update(osv, [ev(0, 9, 1)])
    assert osv.head() == 0
    # NACK with instantaneous feedback sinks the user to the bottom
    osv2 = order_vector_update(osv, [ev(0, 8, 0)])
    assert osv2.combined()[-1] == 0
    # stale bit: nothing moves
    osv3 = order_vector_update(osv2, [ev(0, 9, 1)])
    assert osv3.combined() == osv2.combined()
    # each user appears exactly once
    assert sorted(osv3.combined()) == [0, 1, 2]


def test_queue_ordering_keeps_k_order():
    osv = ScheduleOrderVector.initial([0.5] * 4, PRM)
    for e in [ev(0, 9, 1), ev(1, 7, 1), ev(2, 8, 0), ev(3, 6, 0)]:
        osv.absorb(e)
    assert osv.queue_a == [(1, 7), (0, 9)]
    assert osv.queue_n == [(2, 8), (3, 6)]


def test_combined_queue_sorted_by_belief():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n, m = 5, 12
        osv = ScheduleOrderVector.initial(list(rng.uniform(0.05, 0.95, n)), PRM)
        tr = BeliefTracker(m, PRM, [0.0] * n)
        tr.users = [type(u)(x) for u, x in zip(tr.users, rng.uniform(0.05, 0.95, n))]
        osv = ScheduleOrderVector.initial(tr.initial, PRM)
        for k in range(m, 3, -1):
            e = ev(int(rng.integers(n)), k, int(rng.integers(2)))
            tr.update([e])
            osv.absorb(e)
        b = tr.beliefs(2)
        order = osv.combined()
        assert all(b[order[i]] >= b[order[i + 1]] - 1e-12 for i in range(n - 1))


def test_random_policy_uniform():
    rng = np.random.default_rng(9)
    tr = BeliefTracker(5, PRM, [0.5] * 4)
    pol = RandomPolicy()
    counts = np.bincount([pol.decide(5, tr, rng) for _ in range(10**6)], minlength=4) / 10**6
    assert np.all(np.abs(counts - 0.25) <= 0.002)
    with pytest.raises(ValueError):
        pol.decide(5, tr, None)


def test_fixed_policy():
    tr = BeliefTracker(5, PRM, [0.5] * 3)
    assert FixedUserPolicy(2).decide(5, tr) == 2
    with pytest.raises(IndexError):
        FixedUserPolicy(5).decide(5, tr)


def test_alpha_policy_cases():
    g = GenieTracker(6, PRM, [0.5, 0.5])
    g.update([GenieFeedback(6, (1, 0), 5)])
    assert AlphaPolicy((1, 0, 1, 1)).decide(4, g) == 0
    g = GenieTracker(6, PRM, [0.5, 0.5])
    g.update([GenieFeedback(6, (1, 1), 5)])
    assert AlphaPolicy((0, 0, 1, 0)).decide(4, g) == 1
    with pytest.raises(ValueError):
        AlphaPolicy((0, 0, 1, 0)).decide(4, BeliefTracker(6, PRM, [0.5, 0.5]))
    with pytest.raises(ValueError):
        AlphaPolicy((0, 2, 1, 0))


def test_genie_tracker_newest_only():
    g = GenieTracker(8, PRM, [0.5, 0.5, 0.5])
    g.update([GenieFeedback(6, (1, 0, 1), 5)])
    g.update([GenieFeedback(7, (0, 0, 0), 5)])
    assert g.latest_states == (1, 0, 1)
    assert g.beliefs(4) == pytest.approx([0.68, 0.32, 0.68])


def test_make_policy_names():
    assert isinstance(make_policy("greedy"), GreedyPolicy)
    assert isinstance(make_policy("greedy-queue"), QueueGreedyPolicy)
    assert isinstance(make_policy("random"), RandomPolicy)
    assert make_policy("fixed:2").user == 1
    assert make_policy("alpha:1,0,1,1").alpha == (1.0, 0.0, 1.0, 1.0)
    for bad in ("fixed:0", "whittle", "alpha:1,2"):
        with pytest.raises(ValueError):
            make_policy(bad)


def test_beliefs_stay_in_unit_interval():
    cfg = SystemConfig.build(4, 12, 0.97, 0.01, [0.2, 0.3, 0.5], [0.99, 0.01, 0.5, 0.0])
    s = sample_batch(cfg, batch_rng(1, 0), 50)
    for k in range(50):
        e = simulate_episode(cfg, GreedyPolicy(), s.states[k], s.delays[k], log=True)
        assert all(0.0 <= b <= 1.0 for row in e.beliefs for b in row)


def test_negative_correlation_greedy_uses_argmax():
    prm = ChannelParams(0.2, 0.8)
    cfg = SystemConfig(2, 6, prm, DelayPmf((1.0,)), (0.5, 0.5))
    s = sample_batch(cfg, batch_rng(2, 0), 20)
    for k in range(20):
        e = simulate_episode(cfg, GreedyPolicy(), s.states[k], s.delays[k], log=True)
        for row, a in zip(e.beliefs, e.actions):
            assert a == argmax_lowest(row)
