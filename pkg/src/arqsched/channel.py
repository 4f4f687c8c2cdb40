"""Two-state (ON/OFF) Markov channel: parameters, transitions and belief evolution."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# spill tolerance for clamping T^u(x) back into [0, 1]
_SPILL = 1e-12


class ChannelState(enum.IntEnum):
    OFF = 0
    ON = 1


class Correlation(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    MEMORYLESS = "memoryless"


@dataclass(frozen=True)
class ChannelParams:
    """Transition probabilities of one Gilbert-Elliott channel.

    p is P(ON | previous ON) and r is P(ON | previous OFF).
    """

    p: float
    r: float

    def __post_init__(self):
        for name in ("p", "r"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0) or v != v:
                raise ValueError(f"{name}={v!r} is not a probability")
        if self.p == 1.0 and self.r == 0.0:
            raise ValueError("p=1, r=0 is the identity chain and has no steady state")

    @property
    def memory(self) -> float:
        return self.p - self.r

    @property
    def correlation(self) -> Correlation:
        if self.p > self.r:
            return Correlation.POSITIVE
        if self.p < self.r:
            return Correlation.NEGATIVE
        return Correlation.MEMORYLESS

    @property
    def steady(self) -> float:
        return steady_state(self)


def steady_state(params: ChannelParams) -> float:
    """Limiting ON probability r / (1 - (p - r))."""
    return params.r / (1.0 - (params.p - params.r))


def t_operator(x: float, u: int, params: ChannelParams) -> float:
    """u-step belief evolution T^u(x), in closed form.

    T^u(x) = p_s + (p - r)^u (x - p_s).
    """
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"belief {x!r} outside [0, 1]")
    if u < 0:
        raise ValueError(f"step count must be nonnegative, got {u}")
    if u == 0:
        return float(x)
    ps = steady_state(params)
    y = ps + params.memory**u * (x - ps)
    if y < 0.0:
        if y < -_SPILL:
            raise ArithmeticError(f"T^{u}({x}) = {y} below 0")
        return 0.0
    if y > 1.0:
        if y > 1.0 + _SPILL:
            raise ArithmeticError(f"T^{u}({x}) = {y} above 1")
        return 1.0
    return y


def t_iterate(x: float, u: int, params: ChannelParams) -> float:
    """Reference T^u by repeated one-step application (slow path for tests)."""
    for _ in range(u):
        x = x * params.p + (1.0 - x) * params.r
    return x


def t_operator_array(x, u, params: ChannelParams) -> np.ndarray:
    """Vectorised T^u for arrays of beliefs and step counts (no validation)."""
    ps = steady_state(params)
    y = ps + np.power(params.memory, np.asarray(u, dtype=float)) * (np.asarray(x, dtype=float) - ps)
    return np.clip(y, 0.0, 1.0)


def transition(state: ChannelState | int, params: ChannelParams, rng: np.random.Generator) -> ChannelState:
    """Advance one slot; consumes exactly one uniform draw from ``rng``."""
    on_prob = params.p if state == ChannelState.ON else params.r
    return ChannelState.ON if rng.random() < on_prob else ChannelState.OFF


def sample_paths(
    params: ChannelParams,
    initial: np.ndarray,
    n_slots: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample channel paths for a batch of (episode, user) chains.

    ``initial`` holds the ON probability of the first slot for each chain
    (any shape). Returns a bool array of shape ``initial.shape + (n_slots,)``
    whose last axis runs forward in time (first scheduled slot first).
    """
    initial = np.asarray(initial, dtype=float)
    u = rng.random(initial.shape + (n_slots,))
    out = np.empty(u.shape, dtype=bool)
    out[..., 0] = u[..., 0] < initial
    for j in range(1, n_slots):
        prob = np.where(out[..., j - 1], params.p, params.r)
        out[..., j] = u[..., j] < prob
    return out
