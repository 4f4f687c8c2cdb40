"""Downlink instance description shared by the evaluators and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .channel import ChannelParams, steady_state
from .delay import DelayPmf, as_pmf


@dataclass(frozen=True)
class SystemConfig:
    """N users, horizon m, channel law, delay law and initial beliefs.

    ``params`` is either one ChannelParams shared by every user or a tuple
    with one entry per user (only the non-identical counterexample uses the
    latter). Users are indexed from 0 internally.
    """

    n_users: int
    horizon: int
    params: ChannelParams | tuple[ChannelParams, ...]
    delay: DelayPmf
    initial: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.n_users < 1:
            raise ValueError("need at least one user")
        if self.horizon < 0:
            raise ValueError("horizon must be nonnegative")
        object.__setattr__(self, "delay", as_pmf(self.delay))
        if isinstance(self.params, (list, tuple)):
            params = tuple(self.params)
            if len(params) != self.n_users:
                raise ValueError(f"{len(params)} channel laws for {self.n_users} users")
            object.__setattr__(self, "params", params)
        if not self.initial:
            init = tuple(steady_state(self.user_params(i)) for i in range(self.n_users))
            object.__setattr__(self, "initial", init)
        else:
            init = tuple(float(x) for x in self.initial)
            if len(init) != self.n_users:
                raise ValueError(f"{len(init)} initial beliefs for {self.n_users} users")
            if any(not (0.0 <= x <= 1.0) for x in init):
                raise ValueError(f"initial beliefs {init} outside [0, 1]")
            object.__setattr__(self, "initial", init)

    @classmethod
    def build(
        cls,
        n_users: int,
        horizon: int,
        p: float,
        r: float,
        delay: DelayPmf | Sequence[float] | str,
        initial: Sequence[float] | str | None = None,
    ) -> "SystemConfig":
        params = ChannelParams(p, r)
        if initial is None or (isinstance(initial, str) and initial == "steady"):
            init: tuple[float, ...] = ()
        else:
            init = tuple(initial)
        return cls(n_users, horizon, params, as_pmf(delay), init)

    @property
    def identical(self) -> bool:
        return isinstance(self.params, ChannelParams)

    def user_params(self, i: int) -> ChannelParams:
        if isinstance(self.params, ChannelParams):
            return self.params
        return self.params[i]

    @property
    def shared_params(self) -> ChannelParams:
        if not isinstance(self.params, ChannelParams):
            raise ValueError("instance has per-user channel laws")
        return self.params

    @property
    def steady_init(self) -> bool:
        return all(
            abs(x - steady_state(self.user_params(i))) <= 1e-12 for i, x in enumerate(self.initial)
        )

    def echo(self) -> dict[str, str]:
        """Flat string description used for provenance columns."""
        if isinstance(self.params, ChannelParams):
            p, r = f"{self.params.p:.10g}", f"{self.params.r:.10g}"
        else:
            p = ";".join(f"{c.p:.10g}" for c in self.params)
            r = ";".join(f"{c.r:.10g}" for c in self.params)
        return {
            "N": str(self.n_users),
            "m": str(self.horizon),
            "p": p,
            "r": r,
            "delay_pmf": str(self.delay),
            "pi": ";".join(f"{x:.10g}" for x in self.initial),
        }
