"""Random ARQ feedback delay: finite-support pmf, sampling and freshness law."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

MAX_DELAY = 64
_MASS_TOL = 1e-12


class Bit(enum.IntEnum):
    NACK = 0
    ACK = 1


# marker for "no feedback has arrived yet"
NONE = None


@dataclass(frozen=True)
class DelayPmf:
    """Probability mass function of the feedback delay, indexed d = 0..d_max."""

    probs: tuple[float, ...]
    cap: int = MAX_DELAY

    def __post_init__(self):
        probs = tuple(float(x) for x in self.probs)
        if not probs:
            raise ValueError("delay pmf is empty")
        if any(x < 0 or x != x for x in probs):
            raise ValueError(f"negative or NaN mass in delay pmf {probs}")
        total = sum(probs)
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"delay pmf sums to {total!r}, not 1")
        # trailing zeros carry no information
        last = max(i for i, x in enumerate(probs) if x > 0)
        probs = probs[: last + 1]
        if last > self.cap:
            raise ValueError(f"d_max={last} exceeds the cap {self.cap}")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def point(cls, d: int) -> "DelayPmf":
        return cls(tuple([0.0] * d + [1.0]))

    @classmethod
    def normalized(cls, probs: Sequence[float], tol: float = 1e-3) -> "DelayPmf":
        """Rescale a pmf printed with rounded entries; refuses anything off by more than ``tol``."""
        total = sum(probs)
        if abs(total - 1.0) > tol:
            raise ValueError(f"delay pmf sums to {total!r}; too far from 1 to be rounding")
        return cls(tuple(x / total for x in probs))

    @classmethod
    def parse(cls, text: str) -> "DelayPmf":
        """Parse a comma separated list such as ``"0.5,0.5"`` or ``"1/3,1/3,1/3"``."""
        parts = [s.strip() for s in text.replace(";", ",").split(",") if s.strip()]
        try:
            vals = [float(Fraction(s)) for s in parts]
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse delay pmf {text!r}") from exc
        return cls(tuple(vals))

    def __str__(self):
        return ",".join(f"{x:.10g}" for x in self.probs)

    @property
    def d_max(self) -> int:
        return len(self.probs) - 1

    @property
    def is_deterministic(self) -> bool:
        return self.probs[-1] == 1.0

    def pmf(self, d: int) -> float:
        return self.probs[d] if 0 <= d <= self.d_max else 0.0

    def cdf(self, d: int) -> float:
        """P(D <= d)."""
        if d < 0:
            return 0.0
        if d >= self.d_max:
            return 1.0
        return min(1.0, sum(self.probs[: d + 1]))

    def sf(self, d: int) -> float:
        """P(D > d)."""
        if d < 0:
            return 1.0
        if d >= self.d_max:
            return 0.0
        return max(0.0, sum(self.probs[d + 1 :]))

    def hazard(self, age: int) -> float:
        """P(D = age | D >= age): chance an outstanding feedback lands now."""
        if age >= self.d_max:
            return 1.0
        tail = self.sf(age - 1)
        return self.probs[age] / tail if tail > 0 else 1.0


def sample_delay(pmf: DelayPmf, rng: np.random.Generator) -> int:
    """Draw one delay; consumes exactly one uniform."""
    u = rng.random()
    acc = 0.0
    for d, w in enumerate(pmf.probs):
        acc += w
        if u < acc:
            return d
    return pmf.d_max


def sample_delays(pmf: DelayPmf, shape, rng: np.random.Generator) -> np.ndarray:
    """Vectorised delay draws (one uniform per entry)."""
    cum = np.cumsum(pmf.probs)
    cum[-1] = 1.0
    return np.searchsorted(cum, rng.random(shape), side="right").astype(np.int64)


def freshness_pmf(pmf: DelayPmf, elapsed: int) -> dict[int | None, float]:
    """Law of the freshness l of the newest arrived feedback.

    ``elapsed`` is the number of completed scheduled slots. The newest
    feedback originated l + 1 slots ago; key ``None`` means nothing arrived.
    """
    if elapsed < 0:
        raise ValueError("elapsed must be nonnegative")
    out: dict[int | None, float] = {}
    none_yet = 1.0
    for l in range(elapsed):
        out[l] = pmf.cdf(l) * none_yet
        none_yet *= pmf.sf(l)
    out[None] = none_yet
    return out


@dataclass(frozen=True)
class FeedbackEvent:
    """One time-stamped ARQ bit; slots count down, so arrival_slot <= origin_slot."""

    user: int
    origin_slot: int
    bit: Bit
    arrival_slot: int | None = None

    @property
    def delay(self) -> int | None:
        if self.arrival_slot is None:
            return None
        return self.origin_slot - self.arrival_slot


def arrivals_at_slot_end(
    in_flight: Iterable[tuple[FeedbackEvent, int]], slot: int
) -> tuple[list[FeedbackEvent], list[tuple[FeedbackEvent, int]]]:
    """Split outstanding feedback into what lands at the end of ``slot`` and the rest."""
    arrived: list[FeedbackEvent] = []
    pending: list[tuple[FeedbackEvent, int]] = []
    for event, remaining in in_flight:
        if remaining < 0:
            raise ValueError(f"negative remaining delay for {event}")
        if remaining == 0:
            arrived.append(replace(event, arrival_slot=slot))
        else:
            pending.append((event, remaining - 1))
    return arrived, pending


def as_pmf(value: DelayPmf | Sequence[float] | str) -> DelayPmf:
    if isinstance(value, DelayPmf):
        return value
    if isinstance(value, str):
        return DelayPmf.parse(value)
    return DelayPmf(tuple(value))
