"""ODE integration with terminal event location.

Two marchers share one event-handling path:

* :func:`integrate_adaptive` -- Dormand-Prince 5(4) embedded pair with a
  proportional-integral step-size controller.
* :func:`integrate_fixed` -- classic fourth-order Runge-Kutta at a fixed step,
  used only as an independent cross-check.

Events are scalar functions of ``(t, y)`` that start positive; an event fires
when an accepted step takes it from ``> 0`` to ``<= 0``. The crossing is then
located by bisection on the length of a single re-taken step from the start of
the bracketing step, so the located state is produced by the same scheme that
produced the trajectory.

:func:`penalty_contact_sim` is a separate oracle for the rhomboid linkage in
which the foot rests on a stiff one-sided ground spring instead of being held
by the take-off event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Deriv = Callable[[float, np.ndarray], np.ndarray]
EventFunc = Callable[[float, np.ndarray], float]

MIN_STEP = 1e-14
EVENT_TIME_TOL = 1e-12


class IntegrationError(RuntimeError):
    pass


class StepUnderflowError(IntegrationError):
    pass


class DomainExitError(IntegrationError):
    pass


@dataclass(frozen=True)
class IntegratorSettings:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 1e-4
    fixed_step: float = 1e-5
    contact_stiffness: float = 1e8
    t_max: float = 10.0

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol", "max_step", "fixed_step", "contact_stiffness", "t_max"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"integrator setting {name} must be positive, got {value}")
        if self.fixed_step > self.max_step:
            raise ValueError(
                f"fixed_step ({self.fixed_step}) must not exceed max_step ({self.max_step})"
            )

    def replace(self, **changes) -> "IntegratorSettings":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return IntegratorSettings(**values)


@dataclass(frozen=True)
class Event:
    func: EventFunc
    name: str
    # Bisection stops once |func| drops below this (or the bracket collapses).
    tol: float = 0.0


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    event: Optional[str] = None
    t_event: Optional[float] = None
    y_event: Optional[np.ndarray] = None
    event_value: Optional[float] = None
    bracket: Optional[tuple[float, float]] = None
    n_accepted: int = 0
    n_rejected: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def final_t(self) -> float:
        return float(self.t[-1])

    @property
    def final_y(self) -> np.ndarray:
        return self.y[-1]


# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


def _dp_step(deriv: Deriv, t: float, y: np.ndarray, h: float, k1: np.ndarray):
    """One Dormand-Prince step. Returns (y_new, error_vector, f(t+h, y_new))."""
    k = [k1]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], k))
        k.append(np.asarray(deriv(t + _C[i] * h, yi), dtype=float))
    # Row 7 of the tableau equals b5, so the last stage is f at the new point.
    y_new = y + h * sum(b * kj for b, kj in zip(_B5, k) if b != 0.0)
    err = h * sum(e * kj for e, kj in zip(_E, k) if e != 0.0)
    return y_new, err, k[6]


def _rk4_step(deriv: Deriv, t: float, y: np.ndarray, h: float, k1: Optional[np.ndarray] = None):
    if k1 is None:
        k1 = np.asarray(deriv(t, y), dtype=float)
    k2 = np.asarray(deriv(t + h / 2, y + h / 2 * k1), dtype=float)
    k3 = np.asarray(deriv(t + h / 2, y + h / 2 * k2), dtype=float)
    k4 = np.asarray(deriv(t + h, y + h * k3), dtype=float)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _error_norm(err, y0, y1, settings: IntegratorSettings) -> float:
    scale = settings.abs_tol + settings.rel_tol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(deriv, t0, y0, f0, settings: IntegratorSettings) -> float:
    # Hairer, Norsett & Wanner, "Solving ODEs I", II.4.
    scale = settings.abs_tol + settings.rel_tol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, settings.max_step)
    y1 = y0 + h0 * f0
    f1 = np.asarray(deriv(t0 + h0, y1), dtype=float)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, settings.max_step)


def _scan_events(events: Sequence[Event], t0, y0, t1, y1, values0):
    """Events whose value went from > 0 at the step start to <= 0 at the end."""
    crossed = []
    values1 = []
    for ev, v0 in zip(events, values0):
        v1 = float(ev.func(t1, y1))
        values1.append(v1)
        if v0 > 0 and v1 <= 0:
            crossed.append(ev)
    return crossed, values1


def _locate(event: Event, substep, t0: float, h: float, v0: float):
    """Bisection on the step length; substep(tau) re-takes the step with length tau."""
    lo, hi = 0.0, h
    v_lo = v0
    y_hi = substep(hi)
    v_hi = float(event.func(t0 + hi, y_hi))
    y_lo = None
    for _ in range(200):
        if abs(v_hi) <= event.tol or hi - lo <= EVENT_TIME_TOL:
            break
        mid = 0.5 * (lo + hi)
        y_mid = substep(mid)
        v_mid = float(event.func(t0 + mid, y_mid))
        if v_mid > 0:
            lo, v_lo, y_lo = mid, v_mid, y_mid
        else:
            hi, v_hi, y_hi = mid, v_mid, y_mid
    # Report whichever bracket end is closer to the root.
    if y_lo is not None and abs(v_lo) < abs(v_hi):
        return t0 + lo, y_lo, v_lo, (t0 + lo, t0 + hi)
    return t0 + hi, y_hi, v_hi, (t0 + lo, t0 + hi)


def _finish_event(traj_t, traj_y, events, crossed, substep, t, h, values0, stats):
    located = []
    for ev in crossed:
        idx = list(events).index(ev)
        located.append((ev, *_locate(ev, substep, t, h, values0[idx])))
    ev, te, ye, ve, bracket = min(located, key=lambda item: item[1])
    traj_t.append(te)
    traj_y.append(ye)
    return Trajectory(
        t=np.array(traj_t),
        y=np.array(traj_y),
        event=ev.name,
        t_event=te,
        y_event=ye,
        event_value=ve,
        bracket=bracket,
        **stats,
    )


def integrate_adaptive(
    deriv: Deriv,
    t0: float,
    y0,
    settings: IntegratorSettings = IntegratorSettings(),
    events: Sequence[Event] = (),
    in_domain: Optional[Callable[[np.ndarray], bool]] = None,
) -> Trajectory:
    """Integrate until the first terminal event or ``settings.t_max``.

    Raises :class:`StepUnderflowError` if the controller needs a step below
    1e-14 s, and :class:`DomainExitError` if an accepted state leaves the
    admissible domain without an event having fired.
    """
    y = np.array(y0, dtype=float)
    t = float(t0)
    f = np.asarray(deriv(t, y), dtype=float)
    h = _initial_step(deriv, t, y, f, settings)
    values = [float(ev.func(t, y)) for ev in events]

    ts, ys = [t], [y.copy()]
    n_acc = n_rej = 0
    err_prev = 1e-4
    safety, alpha, beta = 0.9, 0.7 / 5, 0.4 / 5

    while t < settings.t_max:
        h = min(h, settings.max_step, settings.t_max - t)
        if h < MIN_STEP:
            raise StepUnderflowError(f"step size {h:.3e} s below {MIN_STEP:.0e} s at t={t:.9g}")
        y_new, err_vec, f_new = _dp_step(deriv, t, y, h, f)
        if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(err_vec))):
            n_rej += 1
            h *= 0.25
            continue
        err = _error_norm(err_vec, y, y_new, settings)
        if err > 1.0:
            n_rej += 1
            h *= max(0.2, safety * err ** (-1 / 5))
            continue

        t_new = t + h
        crossed, values_new = _scan_events(events, t, y, t_new, y_new, values)
        if crossed:
            t_start, y_start, f_start = t, y, f

            def substep(tau):
                return _dp_step(deriv, t_start, y_start, tau, f_start)[0]

            return _finish_event(
                ts, ys, events, crossed, substep, t, h, values,
                {"n_accepted": n_acc + 1, "n_rejected": n_rej},
            )
        if in_domain is not None and not in_domain(y_new):
            raise DomainExitError(f"state left the admissible domain at t={t_new:.9g}: {y_new}")

        t, y, f, values = t_new, y_new, f_new, values_new
        ts.append(t)
        ys.append(y.copy())
        n_acc += 1
        fac = safety * max(err, 1e-10) ** (-alpha) * err_prev**beta
        h *= min(5.0, max(0.2, fac))
        err_prev = max(err, 1e-4)

    return Trajectory(t=np.array(ts), y=np.array(ys), n_accepted=n_acc, n_rejected=n_rej)


def integrate_fixed(
    deriv: Deriv,
    t0: float,
    y0,
    settings: IntegratorSettings = IntegratorSettings(),
    events: Sequence[Event] = (),
    in_domain: Optional[Callable[[np.ndarray], bool]] = None,
    step: Optional[float] = None,
) -> Trajectory:
    """Classic RK4 at ``step`` (default ``settings.fixed_step``) with the same event handling."""
    h = settings.fixed_step if step is None else step
    y = np.array(y0, dtype=float)
    t = float(t0)
    values = [float(ev.func(t, y)) for ev in events]
    ts, ys = [t], [y.copy()]
    n = 0
    while t < settings.t_max:
        k1 = np.asarray(deriv(t, y), dtype=float)
        y_new = _rk4_step(deriv, t, y, h, k1)
        t_new = t0 + (n + 1) * h
        if not np.all(np.isfinite(y_new)):
            raise IntegrationError(f"non-finite state at t={t_new:.9g}")
        crossed, values_new = _scan_events(events, t, y, t_new, y_new, values)
        if crossed:
            t_start, y_start = t, y

            def substep(tau):
                return _rk4_step(deriv, t_start, y_start, tau, k1)

            return _finish_event(
                ts, ys, events, crossed, substep, t, t_new - t, values,
                {"n_accepted": n + 1, "n_rejected": 0},
            )
        if in_domain is not None and not in_domain(y_new):
            raise DomainExitError(f"state left the admissible domain at t={t_new:.9g}: {y_new}")
        t, y, values = t_new, y_new, values_new
        ts.append(t)
        ys.append(y.copy())
        n += 1
    return Trajectory(t=np.array(ts), y=np.array(ys), n_accepted=n)


# ---------------------------------------------------------------------------
# Penalty-contact oracle for the rhomboid linkage
# ---------------------------------------------------------------------------


def static_contact_force(cfg, settings: IntegratorSettings = IntegratorSettings()) -> float:
    """Ground-spring force with the linkage latched at rest (spring held by the latch)."""
    m_total = cfg.masses.total
    penetration = m_total * cfg.g / settings.contact_stiffness
    return settings.contact_stiffness * penetration


def penalty_contact_sim(cfg, settings: IntegratorSettings = IntegratorSettings(), start: str = "released"):
    """Simulate the rhomboid with the foot on a one-sided linear ground spring.

    The state is ``(theta, z, thetadot, zdot)`` where ``z`` is the foot height.
    Take-off is the first instant the ground spring goes slack (``z > 0``).

    ``start="released"`` preloads the ground spring to the rigid-ground reaction
    at the instant of release; ``start="rest"`` starts from the latched static
    penetration ``m_T g / k_c``, which excites undamped contact ringing.
    """
    from . import rhomboid

    agg = rhomboid.compute_aggregates(cfg.masses)
    m_total = cfg.masses.total
    L, g = cfg.L, cfg.g
    kc = settings.contact_stiffness
    if agg.agg_B == 0:
        raise ValueError("penalty contact needs mass above the foot")

    def deriv(t, state):
        theta, z, w, zdot = state
        s, c = math.sin(theta / 2), math.cos(theta / 2)
        inertia = (L**2 / 16) * (agg.agg_A * s * s + agg.agg_B * c * c) + (L**2 / 48) * agg.agg_C
        d_inertia = (L**2 / 32) * (agg.agg_A - agg.agg_B) * math.sin(theta)
        coupling = agg.agg_D * L / 4 * c
        d_coupling = -agg.agg_D * L / 8 * s
        d_potential = agg.agg_D * g * L / 4 * c - 2 * cfg.k_r * (cfg.theta_ini - theta)
        contact = kc * max(0.0, -z)
        mass = np.array([[inertia, coupling], [coupling, m_total]])
        rhs = np.array(
            [-0.5 * d_inertia * w * w - d_potential, -d_coupling * w * w - m_total * g + contact]
        )
        acc = np.linalg.solve(mass, rhs)
        return np.array([w, zdot, acc[0], acc[1]])

    if start == "released":
        z0 = -rhomboid.ground_reaction(cfg, cfg.theta_end, 0.0) / kc
    elif start == "rest":
        z0 = -static_contact_force(cfg, settings) / kc
    else:
        raise ValueError(f"unknown start mode {start!r}")

    lift = Event(lambda t, s: -s[1], "contact_lost", tol=0.0)
    clamp = Event(lambda t, s: rhomboid.THETA_CLAMP - s[0], "extension_clamp", tol=0.0)
    traj = integrate_fixed(deriv, 0.0, [cfg.theta_end, z0, 0.0, 0.0], settings, events=(lift, clamp))
    if traj.event is None:
        raise IntegrationError("penalty simulation reached t_max without take-off")
    theta, z, w, zdot = traj.y_event
    diagnostics = ("penalty contact",)
    if traj.event == "extension_clamp":
        diagnostics += ("reached extension clamp before contact was lost",)
    report = rhomboid.build_report(
        cfg, traj.t_event, theta, w, foot_zdot=zdot, diagnostics=diagnostics
    )
    return report, traj
