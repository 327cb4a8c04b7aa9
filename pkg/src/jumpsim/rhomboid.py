"""Rhomboidal spring-linkage jumper.

Four equal segments of length ``L`` form a rhombus standing on the foot joint
F. The body joint B sits directly above F; the knees A and D are at the side
vertices and each carries a rotational spring pair of stiffness ``k_r``. The
knee angle ``theta`` (between BA and FA) is the single degree of freedom.

Component order everywhere is ``m1..m8``::

    m1  body joint B        m2, m3  upper segments BA, BD
    m4  knee A              m5      knee D
    m6, m7  lower segments FA, FD   m8  foot joint F

The eight point/segment masses collapse into four weighted sums
(:class:`MassAggregates`) that fully determine the one-coordinate dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import NamedTuple, Optional

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
from .integrator import Event, IntegratorSettings, integrate_adaptive, integrate_fixed

THETA_CLAMP = math.radians(179.9)
EVENT_TOL_REL = 1e-9

# Horizontal offset of each component centre in units of L*cos(theta/2), and
# height in units of (L/2)*sin(theta/2).
_X_COEF = np.array([0.0, 0.5, -0.5, 1.0, -1.0, 0.5, -0.5, 0.0])
_Y_COEF = np.array([4.0, 3.0, 3.0, 2.0, 2.0, 1.0, 1.0, 0.0])
# Segments rotate at +-thetadot/2; joints are point masses.
_SEGMENT = np.array([False, True, True, False, False, True, True, False])
_ROT_SIGN = np.array([0.0, -1.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.0])


@dataclass(frozen=True)
class MassLayout:
    m1: float
    m2: float
    m3: float
    m4: float
    m5: float
    m6: float
    m7: float
    m8: float

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if value < 0 or not math.isfinite(value):
                raise ConfigError(f"mass {f.name} must be a non-negative number, got {value}")
        if not self.total > 0:
            raise ConfigError("total mass must be positive")

    @classmethod
    def table1(cls) -> "MassLayout":
        """Experimental robot mass budget, pair totals split evenly (kg)."""
        return cls(
            m1=0.1155,
            m2=0.00405, m3=0.00405,
            m4=0.0317, m5=0.0317,
            m6=0.00405, m7=0.00405,
            m8=0.0105,
        )

    @classmethod
    def from_array(cls, values) -> "MassLayout":
        values = [float(v) for v in values]
        if len(values) != 8:
            raise ConfigError(f"expected 8 masses, got {len(values)}")
        return cls(*values)

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)])

    @property
    def total(self) -> float:
        return float(sum(getattr(self, f.name) for f in fields(self)))

    @property
    def body_fraction(self) -> float:
        return self.m1 / self.total


@dataclass(frozen=True)
class MassAggregates:
    agg_A: float
    agg_B: float
    agg_C: float
    agg_D: float


def compute_aggregates(masses: MassLayout) -> MassAggregates:
    m = masses
    upper = m.m2 + m.m3
    knees = m.m4 + m.m5
    lower = m.m6 + m.m7
    return MassAggregates(
        agg_A=upper + lower + 4 * knees,
        agg_B=16 * m.m1 + 9 * upper + 4 * knees + lower,
        agg_C=upper + lower,
        agg_D=4 * m.m1 + 3 * upper + 2 * knees + lower,
    )


def spring_stiffness_from_peak_force(F_max: float, theta_ini: float, theta_end: float, L: float) -> float:
    """Per-knee spring-pair stiffness that needs ``F_max`` to hold the charged angle.

    Quasi-static virtual work at ``theta_end``: the vertical force times
    ``dy/dtheta = L cos(theta/2)`` balances the total spring torque
    ``2 k_r (theta_ini - theta)``.
    """
    if theta_end >= theta_ini:
        raise ConfigError(f"theta_end ({theta_end}) must be below theta_ini ({theta_ini})")
    if not (F_max > 0 and L > 0 and theta_end > 0):
        raise ConfigError("F_max, L and theta_end must be positive")
    return F_max * L * math.cos(theta_end / 2) / (2 * (theta_ini - theta_end))


def peak_force_from_stiffness(k_r: float, theta_ini: float, theta_end: float, L: float) -> float:
    return 2 * k_r * (theta_ini - theta_end) / (L * math.cos(theta_end / 2))


@dataclass(frozen=True)
class RhomboidConfig:
    masses: MassLayout
    L: float
    k_r: float
    theta_ini: float
    theta_end: float
    g: float = G_DEFAULT

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}")
        if not self.k_r > 0:
            raise ConfigError(f"k_r must be positive, got {self.k_r}")
        if self.g < 0:
            raise ConfigError(f"g must be non-negative, got {self.g}")
        if not 0 < self.theta_end < self.theta_ini < math.pi:
            raise ConfigError(
                "angles must satisfy 0 < theta_end < theta_ini < pi, got "
                f"theta_end={self.theta_end}, theta_ini={self.theta_ini}"
            )

    @classmethod
    def table1(cls, g: float = G_DEFAULT) -> "RhomboidConfig":
        return cls(
            masses=MassLayout.table1(),
            L=0.15,
            k_r=0.7,
            theta_ini=math.radians(178.0),
            theta_end=math.radians(25.0),
            g=g,
        )

    @classmethod
    def from_alpha(cls, alpha: float, masses: MassLayout, L: float, theta_ini: float, theta_end: float, g: float = G_DEFAULT):
        f_max = alpha * masses.total * g
        k_r = spring_stiffness_from_peak_force(f_max, theta_ini, theta_end, L)
        return cls(masses=masses, L=L, k_r=k_r, theta_ini=theta_ini, theta_end=theta_end, g=g)

    def replace(self, **changes) -> "RhomboidConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return RhomboidConfig(**values)

    def with_alpha(self, alpha: float) -> "RhomboidConfig":
        return RhomboidConfig.from_alpha(alpha, self.masses, self.L, self.theta_ini, self.theta_end, self.g)

    @property
    def d(self) -> float:
        return 2 * self.L

    @property
    def peak_force(self) -> float:
        return peak_force_from_stiffness(self.k_r, self.theta_ini, self.theta_end, self.L)

    @property
    def alpha(self) -> float:
        return self.peak_force / (self.masses.total * self.g)

    @property
    def epe_initial(self) -> float:
        # Two knees, each k_r*(dtheta)^2/2.
        return self.k_r * (self.theta_ini - self.theta_end) ** 2


class Kinematics(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    xdot: np.ndarray
    ydot: np.ndarray
    xddot: np.ndarray
    yddot: np.ndarray
    omega: np.ndarray


def joint_kinematics(L: float, theta: float, thetadot: float = 0.0, thetaddot: float = 0.0) -> Kinematics:
    """Positions, velocities and accelerations of all eight component centres (foot frame)."""
    s, c = math.sin(theta / 2), math.cos(theta / 2)
    w, a = thetadot, thetaddot
    x = _X_COEF * L * c
    y = _Y_COEF * L / 2 * s
    xdot = -_X_COEF * L * s * w / 2
    ydot = _Y_COEF * L / 2 * c * w / 2
    xddot = -_X_COEF * L / 2 * (s * a + c * w * w / 2)
    yddot = _Y_COEF * L / 4 * (c * a - s * w * w / 2)
    omega = _ROT_SIGN * w / 2
    return Kinematics(x, y, xdot, ydot, xddot, yddot, omega)


def segment_inertias(masses: MassLayout, L: float) -> np.ndarray:
    return np.where(_SEGMENT, masses.as_array() * L**2 / 12, 0.0)


def _inertia(agg: MassAggregates, L: float, theta: float) -> float:
    s, c = math.sin(theta / 2), math.cos(theta / 2)
    return (L**2 / 16) * (agg.agg_A * s * s + agg.agg_B * c * c) + (L**2 / 48) * agg.agg_C


def knee_angular_acceleration(cfg: RhomboidConfig, theta: float, thetadot: float, agg: Optional[MassAggregates] = None) -> float:
    agg = agg or compute_aggregates(cfg.masses)
    L = cfg.L
    denom = _inertia(agg, L, theta)
    if not denom > 0:
        raise ConfigError("linkage has no mass above the foot; knee dynamics undefined")
    numer = (
        2 * cfg.k_r * (cfg.theta_ini - theta)
        - (L**2 * thetadot**2 / 64) * math.sin(theta) * (agg.agg_A - agg.agg_B)
        - (agg.agg_D * L * cfg.g / 4) * math.cos(theta / 2)
    )
    return numer / denom


def cg_height(cfg: RhomboidConfig, theta: float, agg: Optional[MassAggregates] = None) -> float:
    agg = agg or compute_aggregates(cfg.masses)
    return agg.agg_D * cfg.L / 2 * math.sin(theta / 2) / cfg.masses.total


def cg_velocity(cfg: RhomboidConfig, theta: float, thetadot: float, agg: Optional[MassAggregates] = None) -> float:
    """Vertical CG velocity as ``agg_D/(4 m_T)`` times the body-joint velocity."""
    agg = agg or compute_aggregates(cfg.masses)
    body_velocity = cfg.L * thetadot * math.cos(theta / 2)
    return agg.agg_D / (4 * cfg.masses.total) * body_velocity


def cg_acceleration(cfg: RhomboidConfig, theta: float, thetadot: float, thetaddot: Optional[float] = None, agg=None) -> float:
    agg = agg or compute_aggregates(cfg.masses)
    if agg.agg_D == 0:
        # All mass at the foot: the CG cannot move whatever the linkage does.
        return 0.0
    if thetaddot is None:
        thetaddot = knee_angular_acceleration(cfg, theta, thetadot, agg)
    s, c = math.sin(theta / 2), math.cos(theta / 2)
    return agg.agg_D * cfg.L / (4 * cfg.masses.total) * (c * thetaddot - s * thetadot**2 / 2)


def ground_reaction(cfg: RhomboidConfig, theta: float, thetadot: float, thetaddot: Optional[float] = None) -> float:
    """Vertical ground force on the foot, ``m_T g + m_T * yddot_CG``."""
    m_total = cfg.masses.total
    return m_total * cfg.g + m_total * cg_acceleration(cfg, theta, thetadot, thetaddot)


def ground_reaction_sum(cfg: RhomboidConfig, theta: float, thetadot: float, thetaddot: Optional[float] = None) -> float:
    """Same force as :func:`ground_reaction`, summed component by component."""
    if thetaddot is None:
        thetaddot = knee_angular_acceleration(cfg, theta, thetadot)
    kin = joint_kinematics(cfg.L, theta, thetadot, thetaddot)
    return float(np.sum(cfg.masses.as_array() * (cfg.g + kin.yddot)))


def takeoff_condition_sides(cfg: RhomboidConfig, theta_to: float, thetadot_to: float) -> tuple[float, float]:
    """Both sides of the closed-form take-off condition written with ``alpha``.

    They agree exactly when ``F_R = 0`` at ``(theta_to, thetadot_to)``.
    """
    agg = compute_aggregates(cfg.masses)
    m_total, g = cfg.masses.total, cfg.g
    s, c = math.sin(theta_to / 2), math.cos(theta_to / 2)
    ratio = (cfg.theta_ini - theta_to) / (cfg.theta_ini - cfg.theta_end)
    lhs = -4 * m_total * g / agg.agg_D
    num = (
        cfg.alpha * m_total * g * math.cos(cfg.theta_end / 2) * ratio - agg.agg_D * g / 4 * c
    ) * c - cfg.L * thetadot_to**2 / 96 * (3 * agg.agg_A + agg.agg_C) * s
    den = (agg.agg_A * s * s + agg.agg_B * c * c) / 16 + agg.agg_C / 48
    return lhs, num / den


def energy_ledger(
    cfg: RhomboidConfig,
    theta: float,
    thetadot: float,
    foot_z: float = 0.0,
    foot_zdot: float = 0.0,
) -> EnergyLedger:
    """Energy split at ``(theta, thetadot)``; GPE is zero at the charged posture.

    ``foot_z``/``foot_zdot`` shift the whole linkage vertically (used by the
    penalty-contact model, where the foot is not pinned).
    """
    m = cfg.masses.as_array()
    m_total = cfg.masses.total
    kin = joint_kinematics(cfg.L, theta, thetadot)
    ydot = kin.ydot + foot_zdot
    v_cg = float(np.dot(m, ydot)) / m_total
    y_cg = float(np.dot(m, kin.y)) / m_total + foot_z
    y_cg_charged = float(np.dot(m, joint_kinematics(cfg.L, cfg.theta_end).y)) / m_total
    return EnergyLedger(
        ke_x=float(0.5 * np.dot(m, kin.xdot**2)),
        ke_y_cg=0.5 * m_total * v_cg**2,
        ke_y_rel=float(0.5 * np.dot(m, (ydot - v_cg) ** 2)),
        ke_rot=float(0.5 * np.dot(segment_inertias(cfg.masses, cfg.L), kin.omega**2)),
        gpe=m_total * cfg.g * (y_cg - y_cg_charged),
        epe=cfg.k_r * (cfg.theta_ini - theta) ** 2,
    )


def build_report(
    cfg: RhomboidConfig,
    t: float,
    theta: float,
    thetadot: float,
    foot_zdot: float = 0.0,
    diagnostics: tuple[str, ...] = (),
    tol_rel: float = IDEAL_TOL_DEFAULT,
) -> TakeoffReport:
    ledger = energy_ledger(cfg, theta, thetadot, foot_zdot=foot_zdot)
    v_cg = cg_velocity(cfg, theta, thetadot) + foot_zdot
    h, h_norm = jump_height(max(v_cg, 0.0), cfg.g, cfg.d)
    return TakeoffReport(
        state_at_takeoff=SimState(t, theta, thetadot),
        classification=classify_takeoff(theta, cfg.theta_ini, tol_rel),
        v_cg_to=v_cg,
        ledger_at_takeoff=ledger,
        efficiency=ledger.ke_y_cg / cfg.epe_initial,
        jump_height=h,
        jump_height_normalized=h_norm,
        epe_initial=cfg.epe_initial,
        char_length=cfg.d,
        diagnostics=diagnostics,
    )


class RhomboidRun(NamedTuple):
    report: TakeoffReport
    trajectory: dict
    steps: int


TRAJECTORY_COLUMNS = (
    "t", "theta_deg", "thetadot", "y_cg", "ydot_cg", "F_R",
    "ke_x", "ke_y_cg", "ke_y_rel", "ke_rot", "gpe", "epe", "total",
)


def sample_columns(cfg: RhomboidConfig, t: np.ndarray, states: np.ndarray) -> dict:
    agg = compute_aggregates(cfg.masses)
    rows = []
    for theta, w in states:
        led = energy_ledger(cfg, theta, w)
        rows.append((
            math.degrees(theta), w, cg_height(cfg, theta, agg), cg_velocity(cfg, theta, w, agg),
            ground_reaction(cfg, theta, w),
            led.ke_x, led.ke_y_cg, led.ke_y_rel, led.ke_rot, led.gpe, led.epe, led.total,
        ))
    table = np.array(rows).reshape(-1, len(TRAJECTORY_COLUMNS) - 1)
    out = {"t": np.asarray(t, dtype=float)}
    for i, name in enumerate(TRAJECTORY_COLUMNS[1:]):
        out[name] = table[:, i]
    return out


def simulate_rhomboid(
    cfg: RhomboidConfig,
    settings: IntegratorSettings = IntegratorSettings(),
    tol_rel: float = IDEAL_TOL_DEFAULT,
    method: str = "adaptive",
    fixed_step: Optional[float] = None,
) -> RhomboidRun:
    """Release from ``theta_end`` and integrate to the first zero of the ground reaction.

    Outcomes besides a normal take-off: ``no_takeoff`` when the linkage has
    no mass above the foot or the knee stalls with the foot still loaded, and
    a delayed report with a diagnostic if the 179.9 deg extension clamp is hit
    first.
    """
    agg = compute_aggregates(cfg.masses)
    m_total = cfg.masses.total
    charged = SimState(0.0, cfg.theta_end, 0.0)
    if _inertia(agg, cfg.L, cfg.theta_end) <= 0:
        report = no_takeoff_report(
            charged, energy_ledger(cfg, cfg.theta_end, 0.0), cfg.epe_initial, cfg.d,
            ("all mass at the foot: the spring does no work on the centre of mass",),
        )
        return RhomboidRun(report, sample_columns(cfg, np.array([0.0]), np.array([[cfg.theta_end, 0.0]])), 0)
    if knee_angular_acceleration(cfg, cfg.theta_end, 0.0, agg) <= 0:
        report = no_takeoff_report(
            charged, energy_ledger(cfg, cfg.theta_end, 0.0), cfg.epe_initial, cfg.d,
            ("spring torque cannot extend the linkage against gravity",),
        )
        return RhomboidRun(report, sample_columns(cfg, np.array([0.0]), np.array([[cfg.theta_end, 0.0]])), 0)

    def deriv(t, state):
        theta, w = state
        return np.array([w, knee_angular_acceleration(cfg, theta, w, agg)])

    weight = m_total * cfg.g
    tol = EVENT_TOL_REL * (weight if weight > 0 else m_total)
    events = (
        Event(lambda t, s: ground_reaction(cfg, s[0], s[1]), "takeoff", tol),
        Event(lambda t, s: s[1], "stalled"),
        Event(lambda t, s: THETA_CLAMP - s[0], "clamp"),
    )
    in_domain = lambda s: 0.0 < s[0] < math.pi  # noqa: E731
    y0 = [cfg.theta_end, 0.0]
    if method == "adaptive":
        traj = integrate_adaptive(deriv, 0.0, y0, settings, events=events, in_domain=in_domain)
    elif method == "fixed":
        traj = integrate_fixed(deriv, 0.0, y0, settings, events=events, in_domain=in_domain, step=fixed_step)
    else:
        raise ValueError(f"unknown integration method {method!r}")

    columns = sample_columns(cfg, traj.t, traj.y)
    if traj.event == "takeoff":
        theta, w = traj.y_event
        report = build_report(cfg, traj.t_event, theta, w, tol_rel=tol_rel)
    elif traj.event == "clamp":
        theta, w = traj.y_event
        report = build_report(
            cfg, traj.t_event, theta, w, tol_rel=tol_rel,
            diagnostics=("reached the 179.9 deg extension clamp before the ground reaction vanished",),
        )
    else:
        theta, w = traj.y_event if traj.event else traj.final_y
        t_end = traj.t_event if traj.event else traj.final_t
        why = "knee stalled with the foot still loaded" if traj.event else f"no take-off before t_max = {settings.t_max} s"
        report = no_takeoff_report(
            SimState(t_end, theta, w), energy_ledger(cfg, theta, w), cfg.epe_initial, cfg.d, (why,)
        )
    return RhomboidRun(report, columns, traj.n_accepted)
