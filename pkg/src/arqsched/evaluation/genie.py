"""Finite-horizon value of the genie-aided system.

In the genie system every arriving feedback carries the whole state vector of
its origin slot, and which user gets scheduled does not change what is
learned. Greedy is therefore optimal there and its value is a sum over slots
of the expected maximum belief, averaged over the freshness of the newest
arrived vector.
"""

from __future__ import annotations

import math
import time

from ..channel import t_operator
from ..delay import freshness_pmf
from ..system import SystemConfig
from .report import ValueReport


def expected_max_belief(config: SystemConfig, t: int) -> float:
    """E[max_i pi_t(i)] under genie observations at slot t."""
    prm = config.shared_params
    m = config.horizon
    elapsed = m - t
    total = 0.0
    for l, w in freshness_pmf(config.delay, elapsed).items():
        if w == 0.0:
            continue
        if l is None:
            total += w * max(t_operator(x, elapsed, prm) for x in config.initial)
            continue
        # newest revealed vector comes from slot k = t + l + 1
        on = [t_operator(x, m - (t + l + 1), prm) for x in config.initial]
        from_on = t_operator(prm.p, l, prm)
        from_off = t_operator(prm.r, l, prm)
        if from_on >= from_off:
            none_hi = math.prod(1.0 - q for q in on)
        else:
            none_hi = math.prod(on)
        hi, lo = max(from_on, from_off), min(from_on, from_off)
        total += w * (hi * (1.0 - none_hi) + lo * none_hi)
    return total


def genie_value(config: SystemConfig) -> ValueReport:
    """Exact genie-greedy (= genie-optimal) value for identical channels and any initial beliefs."""
    start = time.perf_counter()
    per_slot = [expected_max_belief(config, t) for t in range(config.horizon, 0, -1)]
    return ValueReport.make("genie", config, per_slot, runtime_ms=1000 * (time.perf_counter() - start))
