"""Take-off dynamics of spring-driven jumpers: prismatic, baton and rhomboid models."""

from .core import (
    ConfigError,
    EnergyLedger,
    SimState,
    SpringKind,
    SpringSpec,
    TakeoffClass,
    TakeoffReport,
    classify_takeoff,
    efficiency,
    jump_height,
)
from .integrator import IntegratorSettings
from .rhomboid import MassLayout, RhomboidConfig, simulate_rhomboid

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EnergyLedger",
    "IntegratorSettings",
    "MassLayout",
    "RhomboidConfig",
    "SimState",
    "SpringKind",
    "SpringSpec",
    "TakeoffClass",
    "TakeoffReport",
    "classify_takeoff",
    "efficiency",
    "jump_height",
    "simulate_rhomboid",
]
