"""Belief tracking from delayed time-stamped ARQ bits, and the scheduling policies.

Slots are numbered the way the horizon counts down: the first scheduled slot
is ``m`` and the last is ``1``. A feedback bit from slot ``k`` is therefore
*more recent* than one from slot ``k' > k``.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import ChannelParams, Correlation, t_operator
from .delay import Bit, FeedbackEvent


@dataclass
class UserBelief:
    initial: float
    latest: tuple[Bit, int] | None = None

    def value(self, t: int, horizon: int, params: ChannelParams) -> float:
        if self.latest is None:
            return t_operator(self.initial, horizon - t, params)
        bit, k = self.latest
        start = params.p if bit == Bit.ACK else params.r
        return t_operator(start, k - t - 1, params)


class BeliefTracker:
    """Per-user beliefs, recomputed on demand from the newest arrived bit."""

    genie = False

    def __init__(self, horizon: int, params, initial: Sequence[float]):
        self.horizon = horizon
        n = len(initial)
        if isinstance(params, ChannelParams):
            self.params = [params] * n
        else:
            self.params = list(params)
            if len(self.params) != n:
                raise ValueError("one channel law per user required")
        self.users = [UserBelief(float(x)) for x in initial]

    @classmethod
    def for_config(cls, config) -> "BeliefTracker":
        params = [config.user_params(i) for i in range(config.n_users)]
        return cls(config.horizon, params, config.initial)

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def initial(self) -> list[float]:
        return [u.initial for u in self.users]

    def latest(self, i: int) -> tuple[Bit, int] | None:
        return self.users[i].latest

    def belief(self, i: int, t: int) -> float:
        return self.users[i].value(t, self.horizon, self.params[i])

    def beliefs(self, t: int) -> list[float]:
        return [self.belief(i, t) for i in range(self.n_users)]

    def update(self, arrived: Iterable[FeedbackEvent]) -> "BeliefTracker":
        """Absorb arrivals in place; bits older than the held one are ignored."""
        for ev in arrived:
            if not 0 <= ev.user < self.n_users:
                raise IndexError(f"feedback for unknown user {ev.user}")
            if ev.origin_slot > self.horizon:
                raise ValueError(f"origin slot {ev.origin_slot} beyond horizon {self.horizon}")
            held = self.users[ev.user].latest
            if held is None or ev.origin_slot < held[1]:
                self.users[ev.user].latest = (Bit(ev.bit), ev.origin_slot)
        return self

    def copy(self) -> "BeliefTracker":
        return copy.deepcopy(self)


def update_beliefs(tracker: BeliefTracker, arrived: Iterable[FeedbackEvent]) -> BeliefTracker:
    return tracker.copy().update(arrived)


@dataclass(frozen=True)
class GenieFeedback:
    """Cumulative feedback: every user's state in ``origin_slot``."""

    origin_slot: int
    states: tuple[int, ...]
    arrival_slot: int | None = None


class GenieTracker(BeliefTracker):
    """Tracker for the genie-aided system, keyed to the newest revealed state vector."""

    genie = True

    def __init__(self, horizon: int, params, initial: Sequence[float]):
        super().__init__(horizon, params, initial)
        self.latest_slot: int | None = None
        self.latest_states: tuple[int, ...] | None = None

    def update(self, arrived) -> "GenieTracker":
        for fb in arrived:
            if isinstance(fb, FeedbackEvent):
                # plain ARQ bits carry nothing beyond the cumulative vector
                continue
            if self.latest_slot is None or fb.origin_slot < self.latest_slot:
                self.latest_slot = fb.origin_slot
                self.latest_states = tuple(fb.states)
                for i, s in enumerate(fb.states):
                    self.users[i].latest = (Bit(s), fb.origin_slot)
        return self

    def states_at(self, slot: int) -> tuple[int, ...] | None:
        if self.latest_slot == slot:
            return self.latest_states
        return None


# ---------------------------------------------------------------------------
# schedule order vector


class ScheduleOrderVector:
    """Greedy order realised as three queues, with no channel statistics.

    ``queue_a`` holds (user, k) for users whose newest bit is an ACK, most
    recent (smallest k) first; ``queue_x`` holds never-observed users by
    nonincreasing initial belief; ``queue_n`` holds NACK users, oldest
    (largest k) first. Valid only for positively correlated channels.
    """

    def __init__(self, queue_a, queue_x, queue_n):
        self.queue_a: list[tuple[int, int]] = list(queue_a)
        self.queue_x: list[int] = list(queue_x)
        self.queue_n: list[tuple[int, int]] = list(queue_n)

    @classmethod
    def initial(cls, initial: Sequence[float], params: ChannelParams | Sequence[ChannelParams] | None = None):
        if params is not None:
            for prm in [params] if isinstance(params, ChannelParams) else params:
                if prm.correlation != Correlation.POSITIVE:
                    raise ValueError("queue-structured greedy needs p > r")
        order = sorted(range(len(initial)), key=lambda i: (-initial[i], i))
        return cls([], order, [])

    def combined(self) -> list[int]:
        return [u for u, _ in self.queue_a] + self.queue_x + [u for u, _ in self.queue_n]

    def head(self) -> int:
        if self.queue_a:
            return self.queue_a[0][0]
        if self.queue_x:
            return self.queue_x[0]
        return self.queue_n[0][0]

    def held_slot(self, user: int) -> int | None:
        for u, k in self.queue_a:
            if u == user:
                return k
        for u, k in self.queue_n:
            if u == user:
                return k
        return None

    def _remove(self, user: int):
        self.queue_a = [(u, k) for u, k in self.queue_a if u != user]
        self.queue_n = [(u, k) for u, k in self.queue_n if u != user]
        self.queue_x = [u for u in self.queue_x if u != user]

    def absorb(self, event: FeedbackEvent) -> bool:
        """Move the user if this is its newest bit; returns whether anything moved."""
        held = self.held_slot(event.user)
        if held is not None and event.origin_slot >= held:
            return False
        if held is None and event.user not in self.queue_x:
            return False
        self._remove(event.user)
        k = event.origin_slot
        if event.bit == Bit.ACK:
            pos = sum(1 for _, kk in self.queue_a if kk < k)
            self.queue_a.insert(pos, (event.user, k))
        else:
            pos = sum(1 for _, kk in self.queue_n if kk > k)
            self.queue_n.insert(pos, (event.user, k))
        return True

    def copy(self) -> "ScheduleOrderVector":
        return ScheduleOrderVector(self.queue_a, self.queue_x, self.queue_n)

    def __repr__(self):
        return f"ScheduleOrderVector(A={self.queue_a}, X={self.queue_x}, N={self.queue_n})"


def order_vector_decide(osv: ScheduleOrderVector) -> int:
    return osv.head()


def order_vector_update(osv: ScheduleOrderVector, arrived: Iterable[FeedbackEvent]) -> ScheduleOrderVector:
    out = osv.copy()
    for ev in arrived:
        out.absorb(ev)
    return out


# ---------------------------------------------------------------------------
# policies


def argmax_lowest(values: Sequence[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


def greedy_decide_argmax(tracker: BeliefTracker, slot: int) -> int:
    return argmax_lowest(tracker.beliefs(slot))


class Policy:
    """A scheduling rule.

    ``decide`` sees the slot index and a tracker-like view (anything with
    ``beliefs(t)``, ``latest(i)`` and ``n_users``). Stateful policies also
    receive arrivals through ``observe`` and cannot be evaluated by the
    exact information-tree evaluator.
    """

    name = "policy"
    stateful = False
    stochastic = False
    needs_genie = False

    def reset(self, config) -> None:
        pass

    def decide(self, slot: int, view, rng: np.random.Generator | None = None) -> int:
        raise NotImplementedError

    def distribution(self, slot: int, view) -> list[tuple[int, float]]:
        return [(self.decide(slot, view), 1.0)]

    def observe(self, slot: int, arrived) -> None:
        pass

    def __repr__(self):
        return self.name


class GreedyPolicy(Policy):
    name = "greedy"

    def decide(self, slot, view, rng=None):
        return argmax_lowest(view.beliefs(slot))


class QueueGreedyPolicy(Policy):
    """Greedy via the schedule order vector; never evaluates the T operator."""

    name = "greedy-queue"
    stateful = True

    def __init__(self):
        self.osv: ScheduleOrderVector | None = None

    def reset(self, config):
        params = [config.user_params(i) for i in range(config.n_users)]
        self.osv = ScheduleOrderVector.initial(config.initial, params)

    def decide(self, slot, view, rng=None):
        return self.osv.head()

    def observe(self, slot, arrived):
        for ev in arrived:
            self.osv.absorb(ev)


class FixedDelayQueuePolicy(Policy):
    """Deterministic-delay specialisation: newest bit's user goes to top on ACK, bottom on NACK."""

    name = "greedy-fixed-delay"
    stateful = True

    def __init__(self):
        self.order: list[int] = []

    def reset(self, config):
        if not config.delay.is_deterministic:
            raise ValueError("fixed-delay queue rule needs a deterministic delay")
        init = config.initial
        self.order = sorted(range(config.n_users), key=lambda i: (-init[i], i))

    def decide(self, slot, view, rng=None):
        return self.order[0]

    def observe(self, slot, arrived):
        for ev in arrived:
            self.order.remove(ev.user)
            if ev.bit == Bit.ACK:
                self.order.insert(0, ev.user)
            else:
                self.order.append(ev.user)


class RoundRobinPolicy(Policy):
    """Instantaneous-feedback specialisation: stay on ACK, rotate the head away on NACK."""

    name = "round-robin"
    stateful = True

    def __init__(self):
        self.order: list[int] = []

    def reset(self, config):
        if config.delay.probs != (1.0,):
            raise ValueError("round-robin rule needs instantaneous feedback")
        init = config.initial
        self.order = sorted(range(config.n_users), key=lambda i: (-init[i], i))

    def decide(self, slot, view, rng=None):
        return self.order[0]

    def observe(self, slot, arrived):
        for ev in arrived:
            if ev.bit == Bit.NACK:
                self.order.append(self.order.pop(0))


class RandomPolicy(Policy):
    name = "random"
    stochastic = True

    def decide(self, slot, view, rng=None):
        if rng is None:
            raise ValueError("random policy needs a random source")
        return int(rng.integers(view.n_users))

    def distribution(self, slot, view):
        n = view.n_users
        return [(i, 1.0 / n) for i in range(n)]


class FixedUserPolicy(Policy):
    def __init__(self, user: int):
        self.user = user
        self.name = f"fixed:{user + 1}"

    def decide(self, slot, view, rng=None):
        if not 0 <= self.user < view.n_users:
            raise IndexError(f"user {self.user} out of range")
        return self.user


class AlphaPolicy(Policy):
    """Two-user genie scheduler driven by the state pair observed d+1 slots ago.

    ``alpha[j]`` is the probability of scheduling user 1 (index 0) when the
    revealed pair is (0,0), (0,1), (1,0), (1,1) for j = 0..3.
    """

    needs_genie = True
    stochastic = True

    def __init__(self, alpha: Sequence[float]):
        alpha = tuple(float(a) for a in alpha)
        if len(alpha) != 4 or any(not 0.0 <= a <= 1.0 for a in alpha):
            raise ValueError(f"alpha must lie in [0,1]^4, got {alpha}")
        self.alpha = alpha
        self.name = "alpha:" + ",".join(f"{a:g}" for a in alpha)

    def _prob_first(self, view) -> float:
        if not getattr(view, "genie", False):
            raise ValueError("alpha policy needs genie observations")
        if view.n_users != 2:
            raise ValueError("alpha policy is defined for two users")
        states = view.latest_states
        if states is None:
            # nothing revealed yet: lean on the initial beliefs
            init = view.initial
            return 1.0 if init[0] >= init[1] else 0.0
        return self.alpha[2 * states[0] + states[1]]

    def decide(self, slot, view, rng=None):
        q = self._prob_first(view)
        if q in (0.0, 1.0):
            return 0 if q == 1.0 else 1
        if rng is None:
            raise ValueError("alpha policy needs a random source")
        return 0 if rng.random() < q else 1

    def distribution(self, slot, view):
        q = self._prob_first(view)
        return [(i, w) for i, w in ((0, q), (1, 1.0 - q)) if w > 0]


class ScriptedPolicy(Policy):
    """Fixed decisions in some slots, greedy elsewhere."""

    def __init__(self, script: dict[int, int], name: str = "scripted"):
        self.script = dict(script)
        self.name = name

    def decide(self, slot, view, rng=None):
        if slot in self.script:
            return self.script[slot]
        return argmax_lowest(view.beliefs(slot))


def make_policy(spec: str) -> Policy:
    """Policy from its CLI name: greedy | greedy-queue | random | fixed:<i> | alpha:<a1,a2,a3,a4>.

    ``fixed:<i>`` counts users from 1.
    """
    spec = spec.strip()
    if spec == "greedy":
        return GreedyPolicy()
    if spec == "greedy-queue":
        return QueueGreedyPolicy()
    if spec == "greedy-fixed-delay":
        return FixedDelayQueuePolicy()
    if spec == "round-robin":
        return RoundRobinPolicy()
    if spec == "random":
        return RandomPolicy()
    if spec.startswith("fixed:"):
        user = int(spec.split(":", 1)[1])
        if user < 1:
            raise ValueError("fixed:<i> counts users from 1")
        return FixedUserPolicy(user - 1)
    if spec.startswith("alpha:"):
        return AlphaPolicy([float(x) for x in spec.split(":", 1)[1].split(",")])
    raise ValueError(f"unknown policy {spec!r}")
