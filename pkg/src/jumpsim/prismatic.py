"""Prismatic mass-spring jumper.

A sprung body mass sits on a massless linear spring of natural length ``d``
above an unsprung foot mass. ``y`` is the body displacement measured from the
charged posture (``y = 0``); the spring reaches its natural length at
``y = d``. Until take-off the foot is at rest on the ground, so the body moves
as an undamped oscillator and everything has a closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    G_DEFAULT,
    IDEAL_TOL_DEFAULT,
    ConfigError,
    EnergyLedger,
    SimState,
    TakeoffClass,
    TakeoffReport,
    classify_takeoff,
    jump_height,
    no_takeoff_report,
)


@dataclass(frozen=True)
class PrismaticConfig:
    m_body: float
    m_foot: float
    k: float
    d: float
    g: float = G_DEFAULT

    def __post_init__(self):
        if not self.m_body > 0:
            raise ConfigError(f"m_body must be positive, got {self.m_body}")
        if self.m_foot < 0:
            raise ConfigError(f"m_foot must be non-negative, got {self.m_foot}")
        if not self.k > 0:
            raise ConfigError(f"k must be positive, got {self.k}")
        if not self.d > 0:
            raise ConfigError(f"d must be positive, got {self.d}")
        if self.g < 0:
            raise ConfigError(f"g must be non-negative, got {self.g}")

    @classmethod
    def from_alpha(cls, alpha: float, m_total: float, body_fraction: float, d: float, g: float = G_DEFAULT):
        """Build from force-to-weight ratio; ``k*d = alpha*m_T*g + m_B*g`` in the charged state."""
        if not 0 < body_fraction <= 1:
            raise ConfigError(f"body mass fraction must lie in (0, 1], got {body_fraction}")
        if g <= 0:
            raise ConfigError("alpha is undefined for zero gravity")
        m_body = body_fraction * m_total
        k = (alpha * m_total * g + m_body * g) / d
        return cls(m_body=m_body, m_foot=m_total - m_body, k=k, d=d, g=g)

    @property
    def m_total(self) -> float:
        return self.m_body + self.m_foot

    @property
    def body_fraction(self) -> float:
        return self.m_body / self.m_total

    @property
    def omega(self) -> float:
        return math.sqrt(self.k / self.m_body)

    @property
    def peak_force(self) -> float:
        return self.k * self.d - self.m_body * self.g

    @property
    def alpha(self) -> float:
        return self.peak_force / (self.m_total * self.g)

    @property
    def epe_initial(self) -> float:
        return 0.5 * self.k * self.d**2


def equation_of_motion(cfg: PrismaticConfig, y: float) -> float:
    """Body acceleration from spring force and body weight while the foot is grounded."""
    return (cfg.k * (cfg.d - y) - cfg.m_body * cfg.g) / cfg.m_body


def _amplitude(cfg: PrismaticConfig) -> float:
    lift = cfg.k * cfg.d - cfg.m_body * cfg.g
    if lift <= 0:
        raise ConfigError(
            f"spring cannot lift the body: k*d = {cfg.k * cfg.d:.6g} N <= m_B*g = {cfg.m_body * cfg.g:.6g} N"
        )
    return lift / cfg.k


def trajectory(cfg: PrismaticConfig, t):
    """Closed-form ``(y, ydot, yddot)`` of the body at time(s) ``t`` after release."""
    amp = _amplitude(cfg)
    w = cfg.omega
    t = np.asarray(t, dtype=float)
    y = amp * (1.0 - np.cos(w * t))
    ydot = amp * w * np.sin(w * t)
    yddot = amp * w * w * np.cos(w * t)
    if y.ndim == 0:
        return float(y), float(ydot), float(yddot)
    return y, ydot, yddot


def ground_reaction(cfg: PrismaticConfig, y):
    return cfg.k * (cfg.d - np.asarray(y, dtype=float)) + cfg.m_foot * cfg.g


def takeoff_displacement(cfg: PrismaticConfig) -> float:
    """Body displacement at which the ground reaction vanishes."""
    return cfg.d + cfg.m_foot * cfg.g / cfg.k


def _velocity_sq_numerator(cfg: PrismaticConfig) -> float:
    # k*m_B*ydot_to^2 from energy conservation between y = 0 and y_to.
    kd, mb, mf, g = cfg.k * cfg.d, cfg.m_body, cfg.m_foot, cfg.g
    return kd * (kd - 2 * mb * g) - mf * g * g * (2 * mb + mf)


def takeoff_time(cfg: PrismaticConfig) -> Optional[float]:
    """First zero of the ground reaction, or ``None`` if the foot never unloads.

    At take-off the body acceleration is ``-(m_T/m_B)*g``, so
    ``cos(w*t) = -m_T*g/(k*d - m_B*g)``; the principal arccos branch gives
    the first crossing.
    """
    lift = cfg.k * cfg.d - cfg.m_body * cfg.g
    if lift <= 0:
        return None
    arg = -cfg.m_total * cfg.g / lift
    if arg < -1.0:
        return None
    return math.acos(arg) / cfg.omega


def energy_ledger(cfg: PrismaticConfig, y: float, ydot: float) -> EnergyLedger:
    """Energy split while the foot is grounded (GPE measured from the charged posture)."""
    v_cg = cfg.m_body * ydot / cfg.m_total
    ke_cg = 0.5 * cfg.m_total * v_cg**2
    ke_rel = 0.5 * cfg.m_body * (ydot - v_cg) ** 2 + 0.5 * cfg.m_foot * v_cg**2
    return EnergyLedger(
        ke_y_cg=ke_cg,
        ke_y_rel=ke_rel,
        gpe=cfg.m_body * cfg.g * y,
        epe=0.5 * cfg.k * (cfg.d - y) ** 2,
    )


def takeoff_report(cfg: PrismaticConfig, tol_rel: float = IDEAL_TOL_DEFAULT) -> TakeoffReport:
    epe0 = cfg.epe_initial
    t_to = takeoff_time(cfg)
    if t_to is None or _velocity_sq_numerator(cfg) < 0:
        diag = ("spring too weak to unload the foot",)
        ledger = EnergyLedger(epe=epe0)
        return no_takeoff_report(SimState(0.0, 0.0, 0.0), ledger, epe0, cfg.d, diag)

    y_to = takeoff_displacement(cfg)
    ydot_to = math.sqrt(_velocity_sq_numerator(cfg) / (cfg.k * cfg.m_body))
    v_cg = cfg.m_body * ydot_to / cfg.m_total
    ledger = energy_ledger(cfg, y_to, ydot_to)
    if cfg.m_foot == 0 or cfg.g == 0:
        cls = TakeoffClass.IDEALISED
    else:
        cls = classify_takeoff(y_to, cfg.d, tol_rel)
    h, h_norm = jump_height(v_cg, cfg.g, cfg.d)
    return TakeoffReport(
        state_at_takeoff=SimState(t_to, y_to, ydot_to),
        classification=cls,
        v_cg_to=v_cg,
        ledger_at_takeoff=ledger,
        efficiency=ledger.ke_y_cg / epe0,
        jump_height=h,
        jump_height_normalized=h_norm,
        epe_initial=epe0,
        char_length=cfg.d,
    )


def sample_trajectory(cfg: PrismaticConfig, n: int = 200) -> dict[str, np.ndarray]:
    """Uniform samples from release to take-off, as CSV-ready columns."""
    t_to = takeoff_time(cfg)
    if t_to is None:
        t_to = 2 * math.pi / cfg.omega
    t = np.linspace(0.0, t_to, n)
    y, ydot, yddot = trajectory(cfg, t)
    ledgers = [energy_ledger(cfg, yi, vi) for yi, vi in zip(y, ydot)]
    return {
        "t": t,
        "y": y,
        "ydot": ydot,
        "yddot": yddot,
        "y_cg": cfg.m_body * y / cfg.m_total,
        "ydot_cg": cfg.m_body * ydot / cfg.m_total,
        "F_R": ground_reaction(cfg, y),
        "ke_y_cg": np.array([e.ke_y_cg for e in ledgers]),
        "ke_y_rel": np.array([e.ke_y_rel for e in ledgers]),
        "gpe": np.array([e.gpe for e in ledgers]),
        "epe": np.array([e.epe for e in ledgers]),
        "total": np.array([e.total for e in ledgers]),
    }
