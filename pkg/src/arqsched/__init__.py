"""Opportunistic downlink scheduling over Markov channels with delayed ARQ feedback."""

from .channel import ChannelParams, steady_state, t_operator
from .delay import DelayPmf, freshness_pmf
from .system import SystemConfig

__version__ = "0.1.0"

__all__ = ["ChannelParams", "DelayPmf", "SystemConfig", "freshness_pmf", "steady_state", "t_operator"]
