"""Exact policy values by enumerating every channel path and delay sequence.

Exponential in N*m, so only for tiny instances. It does not share any of
the information-state machinery of the tree evaluator, which makes it a
useful independent check, and because the policy hook can look at the true
path it also evaluates policies that condition on hidden channel states.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from ..system import SystemConfig
from .montecarlo import Override, Samples, _param_arrays, run_paths
from .report import ValueReport

MAX_CELLS = 20  # at most 2**20 channel paths


def enumerate_paths(config: SystemConfig) -> tuple[Samples, np.ndarray]:
    """All (path, delay sequence) pairs with their probabilities."""
    n, m = config.n_users, config.horizon
    cells = n * m
    if cells > MAX_CELLS:
        raise ValueError(f"{2 ** cells} channel paths is too many to enumerate")
    p, r, _ = _param_arrays(config)
    init = np.asarray(config.initial)
    codes = np.arange(2**cells, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(cells)) & 1).astype(bool)
    states = bits.reshape(-1, n, m)
    w = np.where(states[:, :, 0], init, 1.0 - init).prod(axis=1) if m else np.ones(len(codes))
    for j in range(1, m):
        on = np.where(states[:, :, j - 1], p, r)
        w = w * np.where(states[:, :, j], on, 1.0 - on).prod(axis=1)
    keep = w > 0
    states, w = states[keep], w[keep]

    support = [d for d in range(config.delay.d_max + 1) if config.delay.pmf(d) > 0]
    seqs = list(itertools.product(support, repeat=m))
    dw = np.array([math.prod(config.delay.pmf(d) for d in s) for s in seqs])
    k = len(seqs)
    all_states = np.repeat(states, k, axis=0)
    all_delays = np.tile(np.array(seqs, dtype=np.int64).reshape(k, m), (len(states), 1))
    weights = np.repeat(w, k) * np.tile(dw, len(states))
    choice = np.zeros((len(weights), m))
    return Samples(all_states, all_delays, choice), weights


def policy_value_enumerated(
    config: SystemConfig,
    kind: str = "greedy",
    user: int = 0,
    genie: bool = False,
    override: Override | None = None,
    label: str | None = None,
) -> ValueReport:
    if kind not in ("greedy", "fixed"):
        raise ValueError("path enumeration needs a deterministic policy (greedy or fixed)")
    samples, weights = enumerate_paths(config)
    rewards, _ = run_paths(config, samples, kind, user, genie=genie, override=override)
    per_slot = weights @ rewards
    return ValueReport.make(label or kind, config, per_slot)
