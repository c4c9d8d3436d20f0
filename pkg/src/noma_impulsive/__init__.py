"""Outage analysis of uplink NOMA with SIC under Bernoulli-Gaussian impulsive noise."""

__version__ = "0.1.0"

from .config import (
    ConfigError,
    NoiseParams,
    NoiseState,
    PowerAllocation,
    Scenario,
    SystemConfig,
    make_scenario,
    validate,
)
from .analytic import outage, outage_joint, outages, success_general, tdma_outage
from .montecarlo import estimate_outage, estimate_tdma_outage

__all__ = [
    "ConfigError",
    "NoiseParams",
    "NoiseState",
    "PowerAllocation",
    "Scenario",
    "SystemConfig",
    "make_scenario",
    "validate",
    "outage",
    "outages",
    "outage_joint",
    "success_general",
    "tdma_outage",
    "estimate_outage",
    "estimate_tdma_outage",
]
