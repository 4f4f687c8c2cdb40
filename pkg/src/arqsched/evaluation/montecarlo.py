"""Monte Carlo policy evaluation.

Two engines share one sampling scheme, so they see identical channel paths
and delays for a given seed:

* ``run_paths`` pushes a whole batch of episodes through the belief
  recursion with numpy; it handles greedy, random and fixed-user policies
  (plus an optional per-slot override hook used by the path enumerator).
* ``simulate_episode`` replays one episode with the real tracker, feedback
  events and policy objects, and can record a decision log. Stateful
  policies (greedy-queue, the fixed-delay and round-robin rules) and the
  genie alpha scheduler go through it.

Episodes are drawn in batches of ``BATCH``; batch b uses the stream
``SeedSequence(seed, spawn_key=(b,))``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..belief import (
    BeliefTracker,
    FixedUserPolicy,
    GenieFeedback,
    GenieTracker,
    GreedyPolicy,
    Policy,
    RandomPolicy,
)
from ..delay import Bit, FeedbackEvent, arrivals_at_slot_end
from ..system import SystemConfig
from .report import ValueReport

BATCH = 4096


def batch_rng(seed: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(batch,)))


@dataclass
class Samples:
    """Channel paths and feedback delays for a batch of episodes.

    ``states[e, i, j]`` is user i's state in slot m - j (so column 0 is the
    first scheduled slot); ``delays[e, j]`` is the delay of the feedback sent
    in that slot; ``choice[e, j]`` is a spare uniform for randomised policies.
    """

    states: np.ndarray
    delays: np.ndarray
    choice: np.ndarray

    @property
    def episodes(self) -> int:
        return self.states.shape[0]


def _param_arrays(config: SystemConfig):
    n = config.n_users
    p = np.array([config.user_params(i).p for i in range(n)])
    r = np.array([config.user_params(i).r for i in range(n)])
    ps = np.array([config.user_params(i).steady for i in range(n)])
    return p, r, ps


def sample_batch(config: SystemConfig, rng: np.random.Generator, episodes: int) -> Samples:
    n, m = config.n_users, config.horizon
    p, r, _ = _param_arrays(config)
    init = np.asarray(config.initial)
    states = np.empty((episodes, n, m), dtype=bool)
    if m:
        states[:, :, 0] = rng.random((episodes, n)) < init
        u = rng.random((episodes, n, max(m - 1, 0)))
        for j in range(1, m):
            prev = states[:, :, j - 1]
            states[:, :, j] = u[:, :, j - 1] < np.where(prev, p, r)
    cum = np.cumsum(config.delay.probs)
    cum[-1] = 1.0
    delays = np.searchsorted(cum, rng.random((episodes, m)), side="right").astype(np.int64)
    choice = rng.random((episodes, m))
    return Samples(states, delays, choice)


# override(t, beliefs, samples, actions_so_far) -> (mask, users) or None
Override = Callable[[int, np.ndarray, Samples, np.ndarray], "tuple[np.ndarray, np.ndarray] | None"]


def run_paths(
    config: SystemConfig,
    samples: Samples,
    kind: str = "greedy",
    user: int = 0,
    genie: bool = False,
    override: Override | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Rewards and actions, each shaped (episodes, m), for a batch of sampled paths.

    ``kind`` is greedy, random or fixed. In genie mode every arriving
    feedback reveals all users' states of its origin slot.
    """
    n, m = config.n_users, config.horizon
    e = samples.episodes
    p, r, ps = _param_arrays(config)
    mem = p - r
    init = np.asarray(config.initial)
    latest_k = np.zeros((e, n), dtype=np.int64)  # 0: nothing arrived yet
    latest_on = np.zeros((e, n), dtype=bool)
    actions = np.zeros((e, m), dtype=np.int64)
    rewards = np.zeros((e, m))
    rows = np.arange(e)
    arrive = (m - np.arange(m))[None, :] - samples.delays  # arrival slot per origin column
    d_max = config.delay.d_max

    for j in range(m):
        t = m - j
        if kind == "greedy" or override is not None:
            seen = latest_k > 0
            base = np.where(seen, np.where(latest_on, p, r), init)
            age = np.where(seen, latest_k - t - 1, m - t)
            beliefs = ps + mem ** age * (base - ps)
        else:
            beliefs = None
        if kind == "greedy":
            a = np.argmax(beliefs, axis=1)
        elif kind == "random":
            a = np.minimum((samples.choice[:, j] * n).astype(np.int64), n - 1)
        elif kind == "fixed":
            a = np.full(e, user, dtype=np.int64)
        else:
            raise ValueError(f"vectorised engine cannot run policy kind {kind!r}")
        if override is not None:
            hit = override(t, beliefs, samples, actions[:, :j])
            if hit is not None:
                mask, users = hit
                a = np.where(mask, users, a)
        actions[:, j] = a
        rewards[:, j] = samples.states[rows, a, j]

        # feedback landing at the end of slot t
        for jj in range(max(0, j - d_max), j + 1):
            lands = arrive[:, jj] == t
            if not lands.any():
                continue
            origin = m - jj
            if genie:
                newer = lands[:, None] & ((latest_k == 0) | (origin < latest_k))
                latest_k = np.where(newer, origin, latest_k)
                latest_on = np.where(newer, samples.states[:, :, jj], latest_on)
            else:
                who = actions[:, jj]
                held = latest_k[rows, who]
                newer = lands & ((held == 0) | (origin < held))
                idx = rows[newer]
                latest_k[idx, who[newer]] = origin
                latest_on[idx, who[newer]] = samples.states[idx, who[newer], jj]
    return rewards, actions


# ---------------------------------------------------------------------------
# scalar replay


@dataclass
class Episode:
    actions: list[int] = field(default_factory=list)
    rewards: list[int] = field(default_factory=list)
    beliefs: list[list[float]] = field(default_factory=list)
    arrivals: list[list[FeedbackEvent]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(self.rewards)


def simulate_episode(
    config: SystemConfig,
    policy: Policy,
    states: np.ndarray,
    delays: np.ndarray,
    rng: np.random.Generator | None = None,
    genie: bool = False,
    log: bool = False,
) -> Episode:
    """Replay one sampled episode through the tracker and the policy object."""
    n, m = config.n_users, config.horizon
    params = [config.user_params(i) for i in range(n)]
    genie = genie or policy.needs_genie
    tracker = (GenieTracker if genie else BeliefTracker)(m, params, config.initial)
    policy.reset(config)
    in_flight: list[tuple[object, int]] = []
    ep = Episode()
    for j in range(m):
        t = m - j
        a = int(policy.decide(t, tracker, rng))
        if not 0 <= a < n:
            raise IndexError(f"policy {policy.name} chose user {a} of {n}")
        ep.actions.append(a)
        ep.rewards.append(int(states[a, j]))
        if log:
            ep.beliefs.append(tracker.beliefs(t))
        d = int(delays[j])
        if genie:
            in_flight.append((GenieFeedback(t, tuple(int(s) for s in states[:, j])), d))
        in_flight.append((FeedbackEvent(a, t, Bit(int(states[a, j]))), d))
        arrived, in_flight = _land(in_flight, t)
        tracker.update(arrived)
        bits = [ev for ev in arrived if isinstance(ev, FeedbackEvent)]
        policy.observe(t, bits)
        if log:
            ep.arrivals.append(bits)
    return ep


def _land(in_flight, t):
    plain = [(ev, d) for ev, d in in_flight if isinstance(ev, FeedbackEvent)]
    cumul = [(ev, d) for ev, d in in_flight if not isinstance(ev, FeedbackEvent)]
    arrived, pending = arrivals_at_slot_end(plain, t)
    out: list = []
    rest_c = []
    for fb, d in cumul:
        if d == 0:
            out.append(GenieFeedback(fb.origin_slot, fb.states, t))
        else:
            rest_c.append((fb, d - 1))
    return out + arrived, pending + rest_c


# ---------------------------------------------------------------------------
# estimators


def _vector_kind(policy: Policy) -> tuple[str, int] | None:
    if type(policy) is GreedyPolicy:
        return "greedy", 0
    if type(policy) is RandomPolicy:
        return "random", 0
    if type(policy) is FixedUserPolicy:
        return "fixed", policy.user
    return None


def episode_totals(
    config: SystemConfig,
    policy: Policy,
    episodes: int,
    seed: int,
    genie: bool = False,
    engine: str = "auto",
):
    """Yield (per-slot reward sums, per-episode totals) batch by batch."""
    vec = _vector_kind(policy)
    if engine == "vector" and vec is None:
        raise ValueError(f"{policy.name} has no vectorised form")
    use_vec = vec is not None and engine != "scalar"
    done = 0
    b = 0
    while done < episodes:
        size = min(BATCH, episodes - done)
        rng = batch_rng(seed, b)
        s = sample_batch(config, rng, size)
        if use_vec:
            rewards, _ = run_paths(config, s, vec[0], vec[1], genie=genie)
        else:
            prng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b, 1)))
            rewards = np.array(
                [
                    simulate_episode(config, policy, s.states[k], s.delays[k], prng, genie=genie).rewards
                    for k in range(size)
                ],
                dtype=float,
            ).reshape(size, config.horizon)
        yield rewards.sum(axis=0), rewards.sum(axis=1)
        done += size
        b += 1


def policy_value_mc(
    config: SystemConfig,
    policy: Policy,
    episodes: int,
    seed: int,
    genie: bool = False,
    engine: str = "auto",
) -> ValueReport:
    """Mean total reward over seeded episodes, with its standard error."""
    if episodes < 1:
        raise ValueError("Monte Carlo needs at least one episode")
    if seed is None:
        raise ValueError("a seed is required for simulation")
    start = time.perf_counter()
    slot_sum = np.zeros(config.horizon)
    s1: list[float] = []
    s2: list[float] = []
    for per_slot, totals in episode_totals(config, policy, episodes, seed, genie, engine):
        slot_sum += per_slot
        s1.append(math.fsum(totals))
        s2.append(math.fsum(totals * totals))
    mean = math.fsum(s1) / episodes
    if episodes > 1:
        var = max(0.0, (math.fsum(s2) - episodes * mean * mean) / (episodes - 1))
        stderr = math.sqrt(var / episodes)
    else:
        stderr = float("nan")
    label = policy.name + ("+genie" if genie and not policy.needs_genie else "")
    return ValueReport.make(
        label,
        config,
        slot_sum / episodes,
        stderr=stderr,
        runtime_ms=1000 * (time.perf_counter() - start),
        episodes=episodes,
    )


def decision_logs(config: SystemConfig, policy: Policy, episodes: int, seed: int, genie: bool = False):
    """Scalar replays with full logs, on the same sampled paths as the estimators."""
    out = []
    b = 0
    while len(out) < episodes:
        size = min(BATCH, episodes - len(out))
        s = sample_batch(config, batch_rng(seed, b), size)
        prng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(b, 1)))
        for k in range(size):
            out.append(simulate_episode(config, policy, s.states[k], s.delays[k], prng, genie=genie, log=True))
        b += 1
    return out
