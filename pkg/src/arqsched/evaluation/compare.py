from __future__ import annotations

from dataclasses import dataclass

from ..belief import GreedyPolicy
from ..system import SystemConfig
from .exact import InfeasibleError, Limits, check_feasible, optimal_value, policy_value_exact
from .genie import genie_value
from .montecarlo import policy_value_mc


@dataclass(frozen=True)
class Suboptimality:
    """Benchmark value, greedy value and the relative gap in percent.

    ``benchmark`` is "optimal" when the exact optimum was computable and
    "genie" otherwise (then the gap is only an upper bound on the true one).
    """

    benchmark: str
    v_benchmark: float
    v_greedy: float
    percent: float
    greedy_stderr: float | None = None
    episodes: int | None = None


def suboptimality_report(
    config: SystemConfig,
    episodes: int = 100_000,
    seed: int = 0,
    limits: Limits | None = None,
    force: str | None = None,
) -> Suboptimality:
    """Exact optimum vs exact greedy when feasible, else genie value vs simulated greedy."""
    exact = force != "genie"
    if exact:
        try:
            check_feasible(config, limits)
        except InfeasibleError:
            if force == "optimal":
                raise
            exact = False
    if exact:
        top = optimal_value(config, limits).total
        greedy = policy_value_exact(config, GreedyPolicy(), limits).total
        return Suboptimality("optimal", top, greedy, 100.0 * (top - greedy) / top)
    top = genie_value(config).total
    rep = policy_value_mc(config, GreedyPolicy(), episodes, seed)
    return Suboptimality("genie", top, rep.total, 100.0 * (top - rep.total) / top, rep.stderr, episodes)
