import math

import numpy as np
import pytest

from jumpsim.baton import BatonConfig, simulate_baton
from jumpsim.core import TakeoffClass
from jumpsim.integrator import (
    DomainExitError,
    Event,
    IntegratorSettings,
    StepUnderflowError,
    integrate_adaptive,
    integrate_fixed,
    penalty_contact_sim,
    static_contact_force,
)
from jumpsim.prismatic import PrismaticConfig
from jumpsim.rhomboid import simulate_rhomboid
from jumpsim.verification import prismatic_ode_deviation


def oscillator(t, y):
    return np.array([y[1], -y[0]])


def test_settings_validation():
    with pytest.raises(ValueError):
        IntegratorSettings(rel_tol=-1)
    with pytest.raises(ValueError):
        IntegratorSettings(max_step=1e-5, fixed_step=1e-4)
    s = IntegratorSettings().replace(rel_tol=1e-6)
    assert s.rel_tol == 1e-6 and s.max_step == 1e-4


def test_harmonic_energy_drift():
    s = IntegratorSettings(max_step=0.05, t_max=20 * math.pi)
    traj = integrate_adaptive(oscillator, 0.0, [1.0, 0.0], s)
    energy = 0.5 * (traj.y[:, 0] ** 2 + traj.y[:, 1] ** 2)
    assert np.max(np.abs(energy - 0.5)) / 0.5 < 1e-8
    assert traj.final_t == pytest.approx(20 * math.pi)


def test_rk4_convergence_order():
    errors = []
    steps = [0.1, 0.05, 0.025, 0.0125]
    for h in steps:
        s = IntegratorSettings(max_step=h, fixed_step=h, t_max=2.0)
        traj = integrate_fixed(oscillator, 0.0, [1.0, 0.0], s)
        errors.append(abs(traj.y[-1, 0] - math.cos(traj.t[-1])))
    slope = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.2)


def test_event_located_and_bracketed():
    # x = cos t crosses zero at pi/2.
    ev = Event(lambda t, y: y[0], "zero", tol=1e-13)
    traj = integrate_adaptive(oscillator, 0.0, [1.0, 0.0], IntegratorSettings(max_step=0.1), events=[ev])
    assert traj.event == "zero"
    assert traj.t_event == pytest.approx(math.pi / 2, abs=1e-10)
    assert abs(traj.event_value) <= 1e-13 or traj.bracket[1] - traj.bracket[0] < 1e-11
    lo, hi = traj.bracket
    assert lo <= traj.t_event <= hi
    # The sign change holds for the numerical state; the exact cos differs by the integration error.
    assert math.cos(lo) > -1e-10 and math.cos(hi) < 1e-10


def test_fixed_step_event():
    ev = Event(lambda t, y: y[0], "zero", tol=1e-13)
    traj = integrate_fixed(oscillator, 0.0, [1.0, 0.0], IntegratorSettings(), events=[ev], step=1e-3)
    assert traj.t_event == pytest.approx(math.pi / 2, abs=1e-9)


def test_domain_exit_raises():
    with pytest.raises(DomainExitError):
        integrate_adaptive(oscillator, 0.0, [1.0, 0.0], IntegratorSettings(max_step=0.1), in_domain=lambda y: y[0] > 0)


def test_step_underflow_raises():
    def blowup(t, y):
        return np.array([y[0] ** 2])

    with pytest.raises(StepUnderflowError):
        integrate_adaptive(blowup, 0.0, [1.0], IntegratorSettings(max_step=0.1, fixed_step=0.01, t_max=2.0))


def test_adaptive_deterministic():
    s = IntegratorSettings(max_step=0.05, t_max=5.0)
    a = integrate_adaptive(oscillator, 0.0, [1.0, 0.0], s)
    b = integrate_adaptive(oscillator, 0.0, [1.0, 0.0], s)
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(a.t, b.t)


@pytest.mark.parametrize(
    "cfg",
    [PrismaticConfig(m_body=0.5, m_foot=0.1, k=400, d=0.3), PrismaticConfig(m_body=0.2, m_foot=0.3, k=150, d=0.5)],
)
def test_prismatic_closed_form_oracle(cfg, settings):
    assert prismatic_ode_deviation(cfg, settings) < 1e-8


def test_baton_self_convergence(settings):
    cfg = BatonConfig.from_k_norm(5.5, 0.2, 0.3, math.radians(30))
    a = simulate_baton(cfg, settings).report.state_at_takeoff.t
    b = simulate_baton(cfg, settings.replace(rel_tol=settings.rel_tol / 2)).report.state_at_takeoff.t
    assert abs(a - b) < 1e-6


def test_tolerance_tightening_changes_little(table1):
    loose = IntegratorSettings(rel_tol=1e-6, max_step=1e-3)
    tight = loose.replace(rel_tol=1e-7)
    a = simulate_rhomboid(table1, loose).report
    b = simulate_rhomboid(table1, tight).report
    assert abs(a.v_cg_to - b.v_cg_to) / b.v_cg_to < 1e-6
    assert abs(a.state_at_takeoff.q - b.state_at_takeoff.q) < 1e-6


def test_fixed_vs_adaptive_table1(table1, table1_run, settings):
    fixed = simulate_rhomboid(table1, settings, method="fixed").report
    assert abs(fixed.v_cg_to - table1_run.report.v_cg_to) / table1_run.report.v_cg_to < 1e-3


def test_penalty_contact_matches_event(table1, table1_run, settings):
    rep, traj = penalty_contact_sim(table1, settings)
    assert abs(rep.v_cg_to - table1_run.report.v_cg_to) / table1_run.report.v_cg_to < 0.01
    assert rep.classification is table1_run.report.classification
    assert traj.event == "contact_lost"


def test_penalty_soft_ground_drifts(table1, table1_run, settings):
    rep, _ = penalty_contact_sim(table1, settings.replace(contact_stiffness=1e4))
    assert abs(rep.v_cg_to - table1_run.report.v_cg_to) / table1_run.report.v_cg_to > 0.01


def test_static_contact_force(table1):
    f = static_contact_force(table1)
    weight = table1.masses.total * table1.g
    assert abs(f - weight) / weight < 1e-6


def test_penalty_rest_start_runs(table1, settings):
    rep, _ = penalty_contact_sim(table1, settings, start="rest")
    assert rep.classification is TakeoffClass.PREMATURE
    with pytest.raises(ValueError):
        penalty_contact_sim(table1, settings, start="bogus")
