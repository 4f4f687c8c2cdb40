"""Instances where greedy scheduling is not optimal, with closed-form gaps and exact cross-checks.

Users are 0-based here as everywhere in the package; "user 1" in the
formulas below is index 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .belief import BeliefTracker, ScriptedPolicy, argmax_lowest
from .channel import ChannelParams, t_operator
from .delay import Bit, DelayPmf, FeedbackEvent
from .evaluation.bruteforce import policy_value_enumerated
from .evaluation.exact import policy_value_exact
from .system import SystemConfig

KINDS = ("N3-delay1-m4", "general-m", "nonidentical-N2")


@dataclass(frozen=True)
class CounterexampleInstance:
    kind: str
    params: ChannelParams | tuple[ChannelParams, ...]
    initial: tuple[float, ...]
    horizon: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown counterexample kind {self.kind!r}")
        pi = tuple(float(x) for x in self.initial)
        object.__setattr__(self, "initial", pi)
        if self.kind == "nonidentical-N2":
            _check_nonidentical(self.params, pi, self.horizon)
        else:
            _check_delay1(self.params, pi, self.horizon, self.kind)

    def config(self) -> SystemConfig:
        delay = DelayPmf.point(0 if self.kind == "nonidentical-N2" else 1)
        return SystemConfig(len(self.initial), self.horizon, self.params, delay, self.initial)


def _check_delay1(params, pi, m, kind):
    if not isinstance(params, ChannelParams):
        raise ValueError("delay-1 counterexamples use one channel law for every user")
    if len(pi) < 3:
        raise ValueError("needs N > 2 users")
    if any(a < b for a, b in zip(pi, pi[1:])):
        raise ValueError(f"initial beliefs must be nonincreasing, got {pi}")
    if not params.p > params.r:
        raise ValueError("needs p > r")
    if kind == "N3-delay1-m4" and m != 4:
        raise ValueError("the m=4 counterexample has horizon 4")
    if kind == "general-m" and m <= 4:
        raise ValueError("general-m construction needs m > 4; use the m=4 form")


def _check_nonidentical(params, pi, m):
    if isinstance(params, ChannelParams) or len(params) != 2:
        raise ValueError("needs two per-user channel laws")
    c1, c2 = params
    if m != 2 or len(pi) != 2:
        raise ValueError("two users, horizon 2")
    if c1.p != c2.p:
        raise ValueError("needs p_1 = p_2")
    if not (c1.p > c1.r >= c2.r):
        raise ValueError("needs p > r_1 >= r_2")
    if not pi[0] > pi[1]:
        raise ValueError("needs pi(1) > pi(2)")
    if not t_operator(pi[1], 1, c2) > c1.r:
        raise ValueError("formula holds only when T_2(pi(2)) > r_1")


# ---------------------------------------------------------------------------
# N > 2, delay 1, m = 4


def greedy_vs_tilde_gap_m4(p: float, r: float, pi: Sequence[float]) -> float:
    """V(tilde) - V(greedy), where tilde schedules users 1 then 2 in the first two slots."""
    CounterexampleInstance("N3-delay1-m4", ChannelParams(p, r), tuple(pi), 4)
    g = p - r
    p1, p2, p3 = pi[0], pi[1], pi[2]
    return g * (p2 - p1 + g * g * (1 - p1) * p3 * (1 - r - g * p2))


def m4_table(p: float, r: float, pi: Sequence[float], policy: str = "greedy") -> list[dict]:
    """Per-feedback-branch beliefs, decisions and rewards in slots 2 and 1.

    ``policy`` is "greedy" (user 1 in slots 4 and 3) or "tilde" (user 1 then
    user 2). Each row also carries the branch probability.
    """
    prm = ChannelParams(p, r)
    CounterexampleInstance("N3-delay1-m4", prm, tuple(pi), 4)
    first = [0, 0] if policy == "greedy" else [0, 1]
    if policy not in ("greedy", "tilde"):
        raise ValueError("policy is greedy or tilde")
    rows = []
    for f4, f3 in itertools.product((1, 0), repeat=2):
        tr = BeliefTracker(4, prm, pi)
        tr.update([FeedbackEvent(first[0], 4, Bit(f4), 3)])
        b2 = tr.beliefs(2)
        a2 = argmax_lowest(b2)
        tr.update([FeedbackEvent(first[1], 3, Bit(f3), 2)])
        b1 = tr.beliefs(1)
        a1 = argmax_lowest(b1)
        q4 = pi[first[0]]
        if first[1] == first[0]:
            q3 = p if f4 else r
        else:
            q3 = t_operator(pi[first[1]], 1, prm)
        prob = (q4 if f4 else 1 - q4) * (q3 if f3 else 1 - q3)
        rows.append(
            dict(f4=f4, f3=f3, prob=prob, beliefs_2=b2, a_2=a2, reward_2=b2[a2], beliefs_1=b1, a_1=a1, reward_1=b1[a1])
        )
    return rows


def m4_value(p: float, r: float, pi: Sequence[float], policy: str = "greedy") -> float:
    prm = ChannelParams(p, r)
    rows = m4_table(p, r, pi, policy)
    first = [0, 0] if policy == "greedy" else [0, 1]
    head = pi[first[0]] + t_operator(pi[first[1]], 1, prm)
    return head + sum(row["prob"] * (row["reward_2"] + row["reward_1"]) for row in rows)


def m4_oracle_gap(p: float, r: float, pi: Sequence[float]) -> float:
    """The same gap from the exact information-tree evaluator."""
    cfg = CounterexampleInstance("N3-delay1-m4", ChannelParams(p, r), tuple(pi), 4).config()
    tilde = policy_value_exact(cfg, ScriptedPolicy({4: 0, 3: 1}, name="tilde")).total
    greedy = policy_value_exact(cfg, ScriptedPolicy({}, name="greedy")).total
    return tilde - greedy


# ---------------------------------------------------------------------------
# N > 2, delay 1, general m


def prob_r1(m: int, p: float, pi: Sequence[float]) -> float:
    """Chance that users 1 and 2 are both ON throughout slots m..5."""
    return pi[0] * p ** (m - 5) * pi[1] * p ** (m - 5)


def greedy_vs_tilde_gap_general(m: int, n: int, params: ChannelParams, pi: Sequence[float]) -> float:
    """V(B) - V(greedy) for the policy B that deviates only on the all-ON run of users 1 and 2.

    Conditioned on that run the slot-4 beliefs are (p, p, T^{m-4}(pi(3)), ...),
    and the m = 4 gap evaluated there gives the expression below.
    """
    if len(pi) != n:
        raise ValueError(f"{len(pi)} initial beliefs for {n} users")
    CounterexampleInstance("general-m", params, tuple(pi), m)
    p, r = params.p, params.r
    pi3 = t_operator(pi[2], m - 4, params)
    return prob_r1(m, p, pi) * (p - r) ** 3 * (1 - p) * pi3 * ((1 - r) - (p - r) * p)


def general_oracle_gap(m: int, params: ChannelParams, pi: Sequence[float]) -> float:
    """Same gap by enumerating every channel path; B looks at the true path to detect the run."""
    cfg = CounterexampleInstance("general-m", params, tuple(pi), m).config()
    run = slice(0, m - 4)  # columns of slots m..5

    def deviate(t, beliefs, samples, actions):
        if t not in (4, 3):
            return None
        on = samples.states[:, 0, run].all(axis=1) & samples.states[:, 1, run].all(axis=1)
        return on, np.full(len(on), 0 if t == 4 else 1)

    b = policy_value_enumerated(cfg, override=deviate, label="tilde-B").total
    g = policy_value_enumerated(cfg).total
    return b - g


# ---------------------------------------------------------------------------
# non-identical channels, N = 2, instantaneous feedback


def nonidentical_gap(p: float, r1: float, r2: float, pi: Sequence[float]) -> float:
    """V(greedy) - V(non-greedy first slot); negative means greedy loses."""
    CounterexampleInstance("nonidentical-N2", (ChannelParams(p, r1), ChannelParams(p, r2)), tuple(pi), 2)
    return (pi[0] - pi[1]) - (r1 - r2) * (1 - pi[0]) * (1 - pi[1])


def nonidentical_oracle_gap(p: float, r1: float, r2: float, pi: Sequence[float]) -> float:
    inst = CounterexampleInstance("nonidentical-N2", (ChannelParams(p, r1), ChannelParams(p, r2)), tuple(pi), 2)
    cfg = inst.config()
    hat = policy_value_exact(cfg, ScriptedPolicy({2: 0}, name="greedy-first")).total
    tilde = policy_value_exact(cfg, ScriptedPolicy({2: 1}, name="other-first")).total
    return hat - tilde


# reference rows
TABLE_VII = (
    dict(p=0.9308, r=0.1797, pi=(0.5216, 0.5130, 0.3305), v_tilde=2.6368, v_greedy=2.6141, gap=0.0227),
    dict(p=0.8875, r=0.0186, pi=(0.3416, 0.3310, 0.2648), v_tilde=1.6155, v_greedy=1.5454, gap=0.0701),
)
TABLE_VIII = (
    dict(p=0.5060, r1=0.1411, r2=0.1054, pi=(0.2276, 0.2179), gap=-0.0119),
    dict(p=0.6333, r1=0.3952, r2=0.1296, pi=(0.5864, 0.5861), gap=-0.0452),
)
