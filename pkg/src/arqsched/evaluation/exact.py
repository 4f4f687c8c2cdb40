"""Exact finite-horizon values by expectimax over information states.

A user's information state at decision slot t is its newest revealed bit
(with age k - t of the slot it came from, or "nothing yet") plus the ages of
its scheduled slots newer than that bit whose feedback is still in flight.
Older in-flight bits carry no information once a newer bit is known and are
dropped. Everything the future depends on is in that tuple, so values are
memoised on ``(t, entries)``; for the optimal value the entries are sorted,
which is valid because users with equal entries are exchangeable.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from functools import lru_cache

from ..belief import Policy, RandomPolicy
from ..channel import ChannelParams, t_operator
from ..system import SystemConfig
from .report import ValueReport

MAX_USERS = 4
MAX_HORIZON = 8
MAX_DELAY = 3

# entry layout: (param index, bit or -1, age, initial belief, pending ages)
_NO_BIT = -1


class InfeasibleError(ValueError):
    """Instance too large for exact enumeration."""


@dataclass(frozen=True)
class Limits:
    users: int = MAX_USERS
    horizon: int = MAX_HORIZON
    delay: int = MAX_DELAY


def check_feasible(config: SystemConfig, limits: Limits | None = None) -> None:
    limits = limits or Limits()
    if config.n_users > limits.users or config.horizon > limits.horizon or config.delay.d_max > limits.delay:
        raise InfeasibleError(
            f"exact evaluation limited to N<={limits.users}, m<={limits.horizon}, d_max<={limits.delay}; "
            f"got N={config.n_users}, m={config.horizon}, d_max={config.delay.d_max} "
            f"(~{cost_estimate(config):.2e} tree nodes)"
        )


def cost_estimate(config: SystemConfig) -> float:
    """Crude upper bound on the number of expanded (state, action) pairs."""
    branch = config.n_users * 2 ** min(config.delay.d_max + 1, config.horizon) * (config.delay.d_max + 1)
    return float(branch) ** min(config.horizon, 12)


class _View:
    """Read-only tracker stand-in handed to policies inside the tree."""

    genie = False

    def __init__(self, solver: "_Solver", t: int, entries):
        self._solver = solver
        self._t = t
        self._entries = entries
        self.n_users = len(entries)
        self.horizon = solver.m
        self.initial = list(solver.config.initial)

    def beliefs(self, t: int) -> list[float]:
        if t != self._t:
            raise ValueError("tree view only answers for the current slot")
        return [self._solver.belief(e, t) for e in self._entries]

    def latest(self, i: int):
        _, bit, age, _, _ = self._entries[i]
        if bit == _NO_BIT:
            return None
        return (bit, self._t + age)


class _Solver:
    def __init__(self, config: SystemConfig):
        self.config = config
        self.m = config.horizon
        self.params: list[ChannelParams] = []
        index: dict[ChannelParams, int] = {}
        self.pidx: list[int] = []
        for i in range(config.n_users):
            prm = config.user_params(i)
            if prm not in index:
                index[prm] = len(self.params)
                self.params.append(prm)
            self.pidx.append(index[prm])
        self.hazard = [config.delay.hazard(j) for j in range(config.delay.d_max + 1)]

    def root(self):
        return tuple((self.pidx[i], _NO_BIT, 0, self.config.initial[i], ()) for i in range(self.config.n_users))

    def belief(self, entry, t: int) -> float:
        pi, bit, age, init, _ = entry
        prm = self.params[pi]
        if bit == _NO_BIT:
            return t_operator(init, self.m - t, prm)
        return t_operator(prm.p if bit else prm.r, age - 1, prm)

    def user_outcomes(self, entry, t: int):
        """Distribution of one user's entry at slot t-1 after the end of slot t."""
        pi, bit, age, init, pending = entry
        prm = self.params[pi]
        aged = tuple(a + 1 for a in pending)
        out = []
        survive = 1.0
        for idx, j in enumerate(pending):
            h = self.hazard[j] if j < len(self.hazard) else 1.0
            w = survive * h
            if w > 0.0:
                if bit == _NO_BIT:
                    on = t_operator(init, self.m - t - j, prm)
                else:
                    on = t_operator(prm.p if bit else prm.r, age - j - 1, prm)
                rest = aged[:idx]
                if on > 0.0:
                    out.append((w * on, (pi, 1, j + 1, 0.0, rest)))
                if on < 1.0:
                    out.append((w * (1.0 - on), (pi, 0, j + 1, 0.0, rest)))
            survive *= 1.0 - h
            if survive <= 0.0:
                break
        if survive > 0.0:
            out.append((survive, (pi, bit, age + 1 if bit != _NO_BIT else 0, init, aged)))
        return out

    def successors(self, entries, t: int, action: int, canonical: bool):
        pi, bit, age, init, pending = entries[action]
        entries = list(entries)
        entries[action] = (pi, bit, age, init, (0,) + pending)
        per_user = [self.user_outcomes(e, t) for e in entries]
        merged: dict[tuple, float] = {}
        for combo in itertools.product(*per_user):
            w = 1.0
            for cw, _ in combo:
                w *= cw
            nxt = tuple(e for _, e in combo)
            if canonical:
                nxt = tuple(sorted(nxt))
            merged[nxt] = merged.get(nxt, 0.0) + w
        return merged.items()


def _add(a: tuple, b: tuple, w: float) -> tuple:
    return tuple(x + w * y for x, y in zip(a, b))


def optimal_value(config: SystemConfig, limits: Limits | None = None) -> ValueReport:
    """Exact optimal expected number of successful slots over the horizon."""
    check_feasible(config, limits)
    start = time.perf_counter()
    solver = _Solver(config)
    n = config.n_users

    @lru_cache(maxsize=None)
    def value(t: int, entries) -> tuple:
        if t == 0:
            return ()
        best = None
        best_total = -math.inf
        seen = set()
        for a in range(n):
            # users with identical entries give identical branches
            if entries[a] in seen:
                continue
            seen.add(entries[a])
            now = solver.belief(entries[a], t)
            future = (0.0,) * (t - 1)
            for nxt, w in solver.successors(entries, t, a, canonical=True):
                future = _add(future, value(t - 1, nxt), w)
            total = now + sum(future)
            if total > best_total + 1e-15:
                best_total = total
                best = (now,) + future
        return best

    per_slot = value(config.horizon, tuple(sorted(solver.root())))
    return ValueReport.make("optimal", config, per_slot, runtime_ms=1000 * (time.perf_counter() - start))


def policy_value_exact(config: SystemConfig, policy: Policy, limits: Limits | None = None) -> ValueReport:
    """Exact expected reward of a policy that decides from the information state alone."""
    check_feasible(config, limits)
    if policy.stateful:
        raise ValueError(f"{policy.name} keeps internal state; evaluate it by simulation")
    start = time.perf_counter()
    solver = _Solver(config)
    if isinstance(policy, RandomPolicy):
        # decisions ignore feedback, so the expected belief is the prior forecast
        per_slot = tuple(
            sum(t_operator(config.initial[i], config.horizon - t, config.user_params(i)) for i in range(config.n_users))
            / config.n_users
            for t in range(config.horizon, 0, -1)
        )
        return ValueReport.make(policy.name, config, per_slot, runtime_ms=1000 * (time.perf_counter() - start))

    @lru_cache(maxsize=None)
    def value(t: int, entries) -> tuple:
        if t == 0:
            return ()
        view = _View(solver, t, entries)
        acc = (0.0,) * t
        for a, pa in policy.distribution(t, view):
            now = solver.belief(entries[a], t)
            future = (0.0,) * (t - 1)
            for nxt, w in solver.successors(entries, t, a, canonical=False):
                future = _add(future, value(t - 1, nxt), w)
            acc = _add(acc, (now,) + future, pa)
        return acc

    policy.reset(config)
    per_slot = value(config.horizon, solver.root())
    return ValueReport.make(policy.name, config, per_slot, runtime_ms=1000 * (time.perf_counter() - start))
