"""Inverted-baton jumper: a point mass on a massless rod hinged at the ground.

A rotational spring at the hinge drives the rod from the charged posture
(``theta = 0``, rod lying along the ground) towards its natural angle. The
ground reaction is the sum of a spring term, a gravity term and a centripetal
term; depending on which dominates when it vanishes the take-off is premature,
idealised or delayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    G_DEFAULT,
    IDEAL_TOL_DEFAULT,
    ConfigError,
    EnergyLedger,
    SimState,
    TakeoffReport,
    classify_takeoff,
    jump_height,
    no_takeoff_report,
)
from .integrator import Event, IntegratorSettings, integrate_adaptive

THETA_CLAMP = math.radians(89.9)
EVENT_TOL_REL = 1e-9


@dataclass(frozen=True)
class BatonConfig:
    m_body: float
    d: float
    k_r: float
    theta_ini: float
    g: float = G_DEFAULT

    def __post_init__(self):
        for name in ("m_body", "d", "k_r"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.g < 0:
            raise ConfigError(f"g must be non-negative, got {self.g}")
        if not 0 < self.theta_ini <= math.pi / 2:
            raise ConfigError(f"theta_ini must lie in (0, pi/2], got {self.theta_ini}")

    @classmethod
    def from_k_norm(cls, k_norm: float, m_body: float, d: float, theta_ini: float, g: float = G_DEFAULT):
        """Stiffness from its normalised value ``k_r / (m_B g d)``."""
        return cls(m_body=m_body, d=d, k_r=k_norm * m_body * g * d, theta_ini=theta_ini, g=g)

    @property
    def k_norm(self) -> float:
        return self.k_r / (self.m_body * self.g * self.d)

    @property
    def epe_initial(self) -> float:
        return 0.5 * self.k_r * self.theta_ini**2


class ReactionComponents(NamedTuple):
    spring_term: float
    gravity_term: float
    centripetal_term: float
    total: float


class BatonRun(NamedTuple):
    report: TakeoffReport
    trajectory: dict


def spring_torque(cfg: BatonConfig, theta: float) -> float:
    return cfg.k_r * (cfg.theta_ini - theta)


def baton_acceleration(cfg: BatonConfig, theta: float, thetadot: float = 0.0) -> float:
    # thetadot does not enter: the rod is massless and the only mass is at its tip.
    return (spring_torque(cfg, theta) / cfg.d - cfg.m_body * cfg.g * math.cos(theta)) / (cfg.m_body * cfg.d)


def rod_tension(cfg: BatonConfig, theta: float, thetadot: float) -> float:
    """Gravity component along the rod minus the centripetal force, sign as written."""
    return cfg.m_body * cfg.g * math.sin(theta) - cfg.m_body * cfg.d * thetadot**2


def ground_reaction_components(cfg: BatonConfig, theta: float, thetadot: float) -> ReactionComponents:
    spring = spring_torque(cfg, theta) / cfg.d * math.cos(theta)
    gravity = cfg.m_body * cfg.g * math.sin(theta) ** 2
    centripetal = cfg.m_body * cfg.d * thetadot**2 * math.sin(theta)
    return ReactionComponents(spring, gravity, centripetal, spring + gravity - centripetal)


def energy_ledger(cfg: BatonConfig, theta: float, thetadot: float) -> EnergyLedger:
    vx = -cfg.d * math.sin(theta) * thetadot
    vy = cfg.d * math.cos(theta) * thetadot
    return EnergyLedger(
        ke_x=0.5 * cfg.m_body * vx**2,
        ke_y_cg=0.5 * cfg.m_body * vy**2,
        gpe=cfg.m_body * cfg.g * cfg.d * math.sin(theta),
        epe=0.5 * cfg.k_r * (cfg.theta_ini - theta) ** 2,
    )


def _rhs(cfg: BatonConfig):
    def deriv(t, state):
        theta, w = state
        return np.array([w, baton_acceleration(cfg, theta, w)])

    return deriv


def simulate_baton(
    cfg: BatonConfig,
    settings: IntegratorSettings = IntegratorSettings(),
    tol_rel: float = IDEAL_TOL_DEFAULT,
) -> BatonRun:
    """Release from the charged posture and integrate to the first zero of the ground reaction."""
    net = spring_torque(cfg, 0.0) / cfg.d - cfg.m_body * cfg.g
    if net <= 0:
        diag = (f"spring cannot lift the baton off the charged posture (net force {net:.6g} N)",)
        report = no_takeoff_report(
            SimState(0.0, 0.0, 0.0), energy_ledger(cfg, 0.0, 0.0), cfg.epe_initial, cfg.d, diag
        )
        return BatonRun(report, _sample_columns(cfg, np.array([0.0]), np.array([[0.0, 0.0]])))
    weight = cfg.m_body * cfg.g
    tol = EVENT_TOL_REL * (weight if weight > 0 else cfg.k_r / cfg.d)
    events = (
        Event(lambda t, s: ground_reaction_components(cfg, s[0], s[1]).total, "takeoff", tol),
        Event(lambda t, s: s[1], "stalled"),
        Event(lambda t, s: THETA_CLAMP - s[0], "clamp"),
    )
    traj = integrate_adaptive(
        _rhs(cfg), 0.0, [0.0, 0.0], settings, events=events,
        in_domain=lambda s: 0.0 <= s[0] <= math.pi / 2,
    )
    samples = _sample_columns(cfg, traj.t, traj.y)

    if traj.event is None:
        theta, w = traj.final_y
        diag = (f"no take-off before t_max = {settings.t_max} s",)
    elif traj.event != "takeoff":
        theta, w = traj.y_event
        diag = {
            "stalled": ("angular velocity returned to zero with positive ground reaction",),
            "clamp": ("reached the 89.9 deg clamp without a ground-reaction root",),
        }[traj.event]
    else:
        theta, w = traj.y_event
        diag = ()

    if diag:
        t_end = traj.t_event if traj.t_event is not None else traj.final_t
        report = no_takeoff_report(
            SimState(t_end, theta, w), energy_ledger(cfg, theta, w), cfg.epe_initial, cfg.d, diag
        )
        return BatonRun(report, samples)

    ledger = energy_ledger(cfg, theta, w)
    v_cg = cfg.d * math.cos(theta) * w
    h, h_norm = jump_height(max(v_cg, 0.0), cfg.g, cfg.d)
    report = TakeoffReport(
        state_at_takeoff=SimState(traj.t_event, theta, w),
        classification=classify_takeoff(theta, cfg.theta_ini, tol_rel),
        v_cg_to=v_cg,
        ledger_at_takeoff=ledger,
        efficiency=ledger.ke_y_cg / cfg.epe_initial,
        jump_height=h,
        jump_height_normalized=h_norm,
        epe_initial=cfg.epe_initial,
        char_length=cfg.d,
    )
    return BatonRun(report, samples)


def _sample_columns(cfg: BatonConfig, t: np.ndarray, y: np.ndarray) -> dict:
    rows = [ground_reaction_components(cfg, th, w) for th, w in y]
    ledgers = [energy_ledger(cfg, th, w) for th, w in y]
    return {
        "t": t,
        "theta": y[:, 0],
        "thetadot": y[:, 1],
        "F_R_spring": np.array([r.spring_term for r in rows]),
        "F_R_gravity": np.array([r.gravity_term for r in rows]),
        "F_R_centripetal": np.array([r.centripetal_term for r in rows]),
        "F_R_total": np.array([r.total for r in rows]),
        "E_kin": np.array([e.ke_x + e.ke_y_cg for e in ledgers]),
        "E_epe": np.array([e.epe for e in ledgers]),
        "E_gpe": np.array([e.gpe for e in ledgers]),
    }

