"""Cross-model oracles run by ``jumpsim verify`` and the test suite.

Each check compares two independent routes to the same quantity and returns
a :class:`CheckResult` holding the measured residual and the threshold it was
held to.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import baton, prismatic, rhomboid
from .integrator import IntegratorSettings, integrate_adaptive, penalty_contact_sim
from .rhomboid import MassLayout, RhomboidConfig

AccelFn = Callable[[RhomboidConfig, float, float], float]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    residual: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status}  {self.name:<28} residual={self.residual:.3e}  threshold={self.threshold:.1e}"
        return f"{text}  {self.detail}" if self.detail else text


def _result(name, residual, threshold, detail="") -> CheckResult:
    residual = float(residual)
    return CheckResult(name, bool(residual < threshold), residual, threshold, detail)


# ---------------------------------------------------------------------------
# First-principles Lagrangian for the rhomboid
# ---------------------------------------------------------------------------


def _positions(L: float, theta):
    """Centres of m1..m8 built from the joint geometry; works for complex theta."""
    half = theta / 2
    h = L * np.sin(half)
    w = L * np.cos(half)
    body, foot = (0.0, 2 * h), (0.0, 0.0 * h)
    knee_a, knee_d = (w, h), (-w, h)

    def mid(p, q):
        return ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)

    pts = [body, mid(body, knee_a), mid(body, knee_d), knee_a, knee_d, mid(foot, knee_a), mid(foot, knee_d), foot]
    xs = np.array([p[0] + 0 * h for p in pts])
    ys = np.array([p[1] + 0 * h for p in pts])
    return xs, ys


def _segment_angles(L: float, theta):
    """Orientation (as a tangent angle) of the four bars BA, BD, FA, FD."""
    half = theta / 2
    h, w = L * np.sin(half), L * np.cos(half)
    # arctan of slope keeps complex-step differentiation valid.
    return np.array([np.arctan(-h / w), np.arctan(h / w), np.arctan(h / w), np.arctan(-h / w)])


def lagrangian_terms(cfg: RhomboidConfig, theta: float) -> tuple[float, float, float]:
    """Generalised inertia ``M``, its slope ``M'`` and the potential slope ``V'``.

    Velocities come from complex-step derivatives of the component positions;
    the slopes use a five-point central stencil.
    """
    m = cfg.masses.as_array()
    seg_m = m[[1, 2, 5, 6]]
    L = cfg.L

    def inertia(th):
        step = 1e-30
        xs, ys = _positions(L, th + 1j * step)
        dx, dy = xs.imag / step, ys.imag / step
        dphi = _segment_angles(L, th + 1j * step).imag / step
        return float(np.dot(m, dx * dx + dy * dy) + np.dot(seg_m * L**2 / 12, dphi**2))

    def potential(th):
        _, ys = _positions(L, th)
        return float(cfg.g * np.dot(m, ys) + cfg.k_r * (cfg.theta_ini - th) ** 2)

    def slope(fn, th, h=1e-3):
        return (fn(th - 2 * h) - 8 * fn(th - h) + 8 * fn(th + h) - fn(th + 2 * h)) / (12 * h)

    return inertia(theta), slope(inertia, theta), slope(potential, theta)


def lagrangian_acceleration(cfg: RhomboidConfig, theta: float, thetadot: float) -> float:
    """Solve ``M th'' + M'/2 th'^2 + V' = 0`` for the knee acceleration."""
    M, dM, dV = lagrangian_terms(cfg, theta)
    return (-0.5 * dM * thetadot**2 - dV) / M


def perturbed_acceleration(scale: float) -> AccelFn:
    """Debug hook: the closed-form acceleration with its numerator scaled."""

    def accel(cfg, theta, thetadot):
        return scale * rhomboid.knee_angular_acceleration(cfg, theta, thetadot)

    return accel


def random_rhomboid_states(n: int = 100, seed: int = 0):
    """Random (config, theta, thetadot) triples spanning masses, springs and postures."""
    rng = np.random.default_rng(seed)
    base = RhomboidConfig.table1()
    out = []
    for _ in range(n):
        masses = MassLayout.from_array(rng.uniform(0.001, 0.2, size=8))
        cfg = base.replace(masses=masses, L=float(rng.uniform(0.05, 0.5)), k_r=float(rng.uniform(0.5, 10.0)))
        out.append((cfg, float(rng.uniform(0.1, math.pi - 0.1)), float(rng.uniform(-60.0, 60.0))))
    return out


def check_lagrangian(accel: Optional[AccelFn] = None, n: int = 100, seed: int = 0, threshold: float = 1e-6) -> CheckResult:
    accel = accel or rhomboid.knee_angular_acceleration
    worst = 0.0
    for cfg, theta, w in random_rhomboid_states(n, seed):
        ref = lagrangian_acceleration(cfg, theta, w)
        got = accel(cfg, theta, w)
        worst = max(worst, abs(got - ref) / max(abs(ref), 1.0))
    return _result("lagrangian_vs_closed_form", worst, threshold, f"{n} random states")


# ---------------------------------------------------------------------------
# Other oracles
# ---------------------------------------------------------------------------


PRISMATIC_CASES = (
    prismatic.PrismaticConfig(m_body=0.5, m_foot=0.1, k=400.0, d=0.3),
    prismatic.PrismaticConfig(m_body=1.0, m_foot=0.0, k=2000.0, d=0.2),
    prismatic.PrismaticConfig(m_body=0.2, m_foot=0.3, k=150.0, d=0.5),
)


def prismatic_ode_deviation(cfg: prismatic.PrismaticConfig, settings: IntegratorSettings) -> float:
    """Max deviation of the adaptive ODE from the closed form, relative to the motion's scale."""
    t_end = prismatic.takeoff_time(cfg) or 2 * math.pi / cfg.omega
    traj = integrate_adaptive(
        lambda t, s: np.array([s[1], prismatic.equation_of_motion(cfg, s[0])]),
        0.0, [0.0, 0.0], settings.replace(t_max=t_end),
    )
    y, ydot, _ = prismatic.trajectory(cfg, traj.t)
    dy = np.max(np.abs(traj.y[:, 0] - y)) / np.max(np.abs(y))
    dv = np.max(np.abs(traj.y[:, 1] - ydot)) / np.max(np.abs(ydot))
    return float(max(dy, dv))


def check_prismatic(settings: IntegratorSettings, threshold: float = 1e-8) -> CheckResult:
    worst = max(prismatic_ode_deviation(cfg, settings) for cfg in PRISMATIC_CASES)
    return _result("prismatic_closed_form_vs_ode", worst, threshold)


def check_penalty(cfg: RhomboidConfig, settings: IntegratorSettings, event_report=None, threshold: float = 0.01) -> CheckResult:
    event_report = event_report or rhomboid.simulate_rhomboid(cfg, settings).report
    report, _ = penalty_contact_sim(cfg, settings)
    rel = abs(report.v_cg_to - event_report.v_cg_to) / abs(event_report.v_cg_to)
    same = report.classification is event_report.classification
    detail = (
        f"k_c={settings.contact_stiffness:.0e}  v_event={event_report.v_cg_to:.6f}  v_penalty={report.v_cg_to:.6f}"
        f"  class {event_report.classification.value}/{report.classification.value}"
    )
    result = _result("event_vs_penalty_contact", rel, threshold, detail)
    if not same:
        return CheckResult(result.name, False, result.residual, threshold, detail + " (classification differs)")
    return result


def check_fixed_vs_adaptive(cfg: RhomboidConfig, settings: IntegratorSettings, event_report=None, threshold: float = 1e-3) -> list[CheckResult]:
    event_report = event_report or rhomboid.simulate_rhomboid(cfg, settings).report
    fixed = rhomboid.simulate_rhomboid(cfg, settings, method="fixed").report
    half = rhomboid.simulate_rhomboid(cfg, settings, method="fixed", fixed_step=settings.fixed_step / 2).report
    v = event_report.v_cg_to
    return [
        _result("adaptive_vs_fixed_step", abs(fixed.v_cg_to - v) / abs(v), threshold),
        _result("fixed_step_halving", abs(half.v_cg_to - fixed.v_cg_to) / abs(fixed.v_cg_to), threshold),
    ]


def energy_drift(columns_total: np.ndarray, reference: float) -> float:
    return float(np.max(np.abs(np.asarray(columns_total) - reference)) / reference)


def check_energy(cfg: RhomboidConfig, settings: IntegratorSettings, run=None, threshold: float = 1e-6) -> CheckResult:
    run = run or rhomboid.simulate_rhomboid(cfg, settings)
    drifts = [energy_drift(run.trajectory["total"], cfg.epe_initial)]
    for k_norm in (4.5, 5.5, 10.0):
        bcfg = baton.BatonConfig.from_k_norm(k_norm, 0.2, 0.3, math.radians(30))
        cols = baton.simulate_baton(bcfg, settings).trajectory
        total = cols["E_kin"] + cols["E_epe"] + cols["E_gpe"]
        drifts.append(energy_drift(total, bcfg.epe_initial))
    for pcfg in PRISMATIC_CASES:
        t_end = prismatic.takeoff_time(pcfg)
        traj = integrate_adaptive(
            lambda t, s, c=pcfg: np.array([s[1], prismatic.equation_of_motion(c, s[0])]),
            0.0, [0.0, 0.0], settings.replace(t_max=t_end),
        )
        total = [prismatic.energy_ledger(pcfg, y, v).total for y, v in traj.y]
        drifts.append(energy_drift(total, pcfg.epe_initial))
    return _result("energy_conservation", max(drifts), threshold, "rhomboid, baton x3, prismatic x3")


def check_reaction_identity(cfg: RhomboidConfig, run, threshold: float = 1e-9) -> CheckResult:
    """CG-form ground reaction against the component-by-component sum."""
    worst = 0.0
    weight = cfg.masses.total * cfg.g
    for theta, w in zip(np.radians(run.trajectory["theta_deg"]), run.trajectory["thetadot"]):
        a = rhomboid.ground_reaction(cfg, theta, w)
        b = rhomboid.ground_reaction_sum(cfg, theta, w)
        worst = max(worst, abs(a - b) / weight)
    return _result("ground_reaction_identity", worst, threshold)


def check_takeoff_balance(cfg: RhomboidConfig, report, threshold: float = 1e-6) -> CheckResult:
    """Closed-form take-off condition evaluated at the simulated take-off state."""
    st = report.state_at_takeoff
    lhs, rhs = rhomboid.takeoff_condition_sides(cfg, st.q, st.qdot)
    return _result("takeoff_condition_balance", abs(lhs - rhs) / abs(lhs), threshold)


def check_self_convergence(settings: IntegratorSettings, threshold: float = 1e-6) -> CheckResult:
    cfg = baton.BatonConfig.from_k_norm(5.5, 0.2, 0.3, math.radians(30))
    a = baton.simulate_baton(cfg, settings).report.state_at_takeoff.t
    b = baton.simulate_baton(cfg, settings.replace(rel_tol=settings.rel_tol / 2)).report.state_at_takeoff.t
    return _result("baton_event_self_convergence", abs(a - b), threshold, "seconds")


CHECK_NAMES = (
    "prismatic_closed_form_vs_ode",
    "lagrangian_vs_closed_form",
    "event_vs_penalty_contact",
    "adaptive_vs_fixed_step",
    "energy_conservation",
    "ground_reaction_identity",
    "takeoff_condition_balance",
    "baton_event_self_convergence",
)


def run_all(
    settings: IntegratorSettings = IntegratorSettings(),
    accel: Optional[AccelFn] = None,
    cfg: Optional[RhomboidConfig] = None,
    only: Optional[Sequence[str]] = None,
) -> list[CheckResult]:
    """Run the oracles named in ``only`` (all of them by default), in a fixed order.

    ``adaptive_vs_fixed_step`` also yields the step-halving result.
    """
    unknown = set(only or ()) - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown check(s): {', '.join(sorted(unknown))}; known: {', '.join(CHECK_NAMES)}")
    wanted = set(only) if only else set(CHECK_NAMES)
    cfg = cfg or RhomboidConfig.table1()
    run = rhomboid.simulate_rhomboid(cfg, settings)
    checks = {
        "prismatic_closed_form_vs_ode": lambda: [check_prismatic(settings)],
        "lagrangian_vs_closed_form": lambda: [check_lagrangian(accel)],
        "event_vs_penalty_contact": lambda: [check_penalty(cfg, settings, run.report)],
        "adaptive_vs_fixed_step": lambda: check_fixed_vs_adaptive(cfg, settings, run.report),
        "energy_conservation": lambda: [check_energy(cfg, settings, run)],
        "ground_reaction_identity": lambda: [check_reaction_identity(cfg, run)],
        "takeoff_condition_balance": lambda: [check_takeoff_balance(cfg, run.report)],
        "baton_event_self_convergence": lambda: [check_self_convergence(settings)],
    }
    results = []
    for name in CHECK_NAMES:
        if name in wanted:
            results.extend(checks[name]())
    return results
