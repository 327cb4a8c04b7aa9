"""Shared value types, take-off classification and energy bookkeeping.

All quantities are SI. Angles are radians; degrees are only accepted at the
configuration boundary (see :mod:`jumpsim.config`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

G_DEFAULT = 9.81
IDEAL_TOL_DEFAULT = 0.01


class ConfigError(ValueError):
    """Raised for physically meaningless or inconsistent model parameters."""


class SpringKind(str, enum.Enum):
    ROTATIONAL = "rotational"
    TRANSLATIONAL = "translational"


@dataclass(frozen=True)
class SpringSpec:
    """Hookean spring: stiffness plus natural angle (rad) or natural length (m)."""

    kind: SpringKind
    stiffness: float
    natural: float

    def __post_init__(self):
        object.__setattr__(self, "kind", SpringKind(self.kind))
        if not (self.stiffness > 0 and math.isfinite(self.stiffness)):
            raise ConfigError(f"spring stiffness must be positive, got {self.stiffness}")
        if not (self.natural > 0 and math.isfinite(self.natural)):
            raise ConfigError(f"spring natural state must be positive, got {self.natural}")
        if self.kind is SpringKind.ROTATIONAL and not self.natural < math.pi:
            raise ConfigError(f"rotational natural angle must lie in (0, pi), got {self.natural}")


@dataclass(frozen=True)
class SimState:
    """Time, generalized coordinate and its rate for any of the three models."""

    t: float
    q: float
    qdot: float

    def __post_init__(self):
        for name in ("t", "q", "qdot"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.t < 0:
            raise ValueError(f"negative time {self.t}")


@dataclass(frozen=True)
class EnergyLedger:
    """Instantaneous split of the mechanical energy into six named parts.

    ``gpe`` is measured from the charged posture, so every component is
    non-negative during an acceleration phase. ``total`` is the plain sum of
    the six parts.
    """

    ke_x: float = 0.0
    ke_y_cg: float = 0.0
    ke_y_rel: float = 0.0
    ke_rot: float = 0.0
    gpe: float = 0.0
    epe: float = 0.0

    def __post_init__(self):
        for name in ("ke_x", "ke_y_cg", "ke_y_rel", "ke_rot", "gpe", "epe"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @property
    def total(self) -> float:
        return self.ke_x + self.ke_y_cg + self.ke_y_rel + self.ke_rot + self.gpe + self.epe

    def fractions(self, reference: float) -> dict[str, float]:
        """Each component divided by ``reference`` (normally the stored energy)."""
        return {name: value / reference for name, value in self.components().items()}

    def components(self) -> dict[str, float]:
        return {
            "ke_x": self.ke_x,
            "ke_y_cg": self.ke_y_cg,
            "ke_y_rel": self.ke_y_rel,
            "ke_rot": self.ke_rot,
            "gpe": self.gpe,
            "epe": self.epe,
        }

    def to_dict(self) -> dict[str, float]:
        out = self.components()
        out["total"] = self.total
        return out

    def scaled(self, factor: float) -> "EnergyLedger":
        return EnergyLedger(**{k: v * factor for k, v in self.components().items()})


class TakeoffClass(str, enum.Enum):
    PREMATURE = "premature"
    IDEALISED = "idealised"
    DELAYED = "delayed"
    NO_TAKEOFF = "no_takeoff"


@dataclass(frozen=True)
class TakeoffReport:
    state_at_takeoff: SimState
    classification: TakeoffClass
    v_cg_to: float
    ledger_at_takeoff: EnergyLedger
    efficiency: float
    jump_height: float
    jump_height_normalized: float
    epe_initial: float
    char_length: float
    # Free-form notes, e.g. "reached extension clamp".
    diagnostics: tuple[str, ...] = field(default_factory=tuple)

    @property
    def took_off(self) -> bool:
        return self.classification is not TakeoffClass.NO_TAKEOFF

    def to_dict(self) -> dict:
        out = {
            "state_at_takeoff": asdict(self.state_at_takeoff),
            "classification": self.classification.value,
            "v_cg_to": self.v_cg_to,
            "ledger_at_takeoff": self.ledger_at_takeoff.to_dict(),
            "ledger_fractions": self.ledger_at_takeoff.fractions(self.epe_initial),
            "efficiency": self.efficiency,
            "jump_height": self.jump_height,
            "jump_height_normalized": self.jump_height_normalized,
            "epe_initial": self.epe_initial,
            "char_length": self.char_length,
            "diagnostics": list(self.diagnostics),
        }
        return out


def classify_takeoff(state: float, natural: float, tol_rel: float = IDEAL_TOL_DEFAULT) -> TakeoffClass:
    """Classify a take-off from the spring state (angle or length) when the foot unloads.

    Premature below ``natural*(1 - tol_rel)``, delayed above
    ``natural*(1 + tol_rel)``, idealised in between.
    """
    if tol_rel <= 0:
        raise ValueError("tol_rel must be positive")
    if natural <= 0:
        raise ValueError("natural spring state must be positive")
    if state < natural * (1.0 - tol_rel):
        return TakeoffClass.PREMATURE
    if state > natural * (1.0 + tol_rel):
        return TakeoffClass.DELAYED
    return TakeoffClass.IDEALISED


def efficiency(ledger_at_takeoff: EnergyLedger, epe_initial: float) -> float:
    """Elastic-kinetic conversion efficiency: vertical CG kinetic energy over stored energy."""
    if not epe_initial > 0:
        raise ValueError(f"stored elastic energy must be positive, got {epe_initial}")
    return ledger_at_takeoff.ke_y_cg / epe_initial


def jump_height(v_cg_to: float, g: float, d: float) -> tuple[float, float]:
    """Ballistic apex rise of the CG above take-off, and that rise over ``d``."""
    if v_cg_to < 0:
        raise ValueError(f"take-off velocity must be non-negative, got {v_cg_to}")
    if g <= 0:
        h = math.inf if v_cg_to > 0 else 0.0
    else:
        h = v_cg_to**2 / (2.0 * g)
    return h, h / d


def no_takeoff_report(
    state: SimState,
    ledger: EnergyLedger,
    epe_initial: float,
    char_length: float,
    diagnostics: Optional[tuple[str, ...]] = None,
) -> TakeoffReport:
    return TakeoffReport(
        state_at_takeoff=state,
        classification=TakeoffClass.NO_TAKEOFF,
        v_cg_to=0.0,
        ledger_at_takeoff=ledger,
        efficiency=0.0,
        jump_height=0.0,
        jump_height_normalized=0.0,
        epe_initial=epe_initial,
        char_length=char_length,
        diagnostics=diagnostics or (),
    )
