from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..system import SystemConfig

CSV_COLUMNS = ("policy", "N", "m", "p", "r", "delay_pmf", "value", "stderr", "runtime_ms")


@dataclass(frozen=True)
class ValueReport:
    """Expected successful transmissions over the horizon.

    ``per_slot`` runs in scheduling order, i.e. slot m first and slot 1 last.
    """

    policy: str
    total: float
    per_slot: tuple[float, ...]
    config: dict[str, str] = field(default_factory=dict)
    stderr: float | None = None
    runtime_ms: float = 0.0
    episodes: int | None = None

    @classmethod
    def make(cls, policy, config: SystemConfig, per_slot, stderr=None, runtime_ms=0.0, episodes=None):
        per_slot = tuple(float(x) for x in per_slot)
        return cls(
            policy=policy,
            total=math.fsum(per_slot),
            per_slot=per_slot,
            config=config.echo(),
            stderr=stderr,
            runtime_ms=runtime_ms,
            episodes=episodes,
        )

    @property
    def rate(self) -> float:
        return self.total / len(self.per_slot) if self.per_slot else 0.0

    def csv_row(self) -> dict[str, str]:
        c = self.config
        return {
            "policy": self.policy,
            "N": c.get("N", ""),
            "m": c.get("m", ""),
            "p": c.get("p", ""),
            "r": c.get("r", ""),
            "delay_pmf": c.get("delay_pmf", ""),
            "value": f"{self.total:.10f}",
            "stderr": "" if self.stderr is None else f"{self.stderr:.10f}",
            "runtime_ms": f"{self.runtime_ms:.1f}",
        }
