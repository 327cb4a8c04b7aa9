import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from jumpsim.baton import (
    BatonConfig,
    baton_acceleration,
    energy_ledger,
    ground_reaction_components,
    rod_tension,
    simulate_baton,
)
from jumpsim.core import ConfigError, TakeoffClass

THETA_INI = math.radians(30)


def cfg_for(k_norm, theta_ini=THETA_INI):
    return BatonConfig.from_k_norm(k_norm, m_body=0.2, d=0.3, theta_ini=theta_ini)


def scipy_takeoff(cfg):
    def rhs(t, s):
        return [s[1], baton_acceleration(cfg, s[0])]

    def unload(t, s):
        return ground_reaction_components(cfg, s[0], s[1]).total

    unload.terminal = True
    unload.direction = -1
    sol = solve_ivp(rhs, (0, 5), [0.0, 0.0], events=unload, rtol=1e-12, atol=1e-14)
    return sol.t_events[0][0], sol.y_events[0][0]


def test_validation():
    with pytest.raises(ConfigError):
        BatonConfig(m_body=0.2, d=0.3, k_r=1.0, theta_ini=2.0)
    with pytest.raises(ConfigError):
        BatonConfig(m_body=-0.2, d=0.3, k_r=1.0, theta_ini=0.5)


def test_k_norm_round_trip():
    assert cfg_for(5.5).k_norm == pytest.approx(5.5)


@pytest.mark.parametrize(
    "k_norm, expected",
    [(4.5, TakeoffClass.DELAYED), (5.5, TakeoffClass.IDEALISED), (10, TakeoffClass.PREMATURE)],
)
def test_classification_triple(k_norm, expected):
    assert simulate_baton(cfg_for(k_norm)).report.classification is expected


@pytest.mark.parametrize("k_norm", [4.5, 5.5, 7.0, 10.0])
def test_takeoff_matches_scipy(k_norm):
    cfg = cfg_for(k_norm)
    t_ref, (th_ref, w_ref) = scipy_takeoff(cfg)
    st_ = simulate_baton(cfg).report.state_at_takeoff
    assert st_.t == pytest.approx(t_ref, abs=1e-9)
    assert st_.q == pytest.approx(th_ref, rel=1e-8)
    assert st_.qdot == pytest.approx(w_ref, rel=1e-8)


def test_takeoff_angles_regression():
    # Values from the scipy oracle above at 1e-12 tolerance.
    angles = [math.degrees(simulate_baton(cfg_for(k)).report.state_at_takeoff.q) for k in (4.5, 5.5, 7, 10)]
    np.testing.assert_allclose(angles, [34.00, 29.935, 27.80, 26.14], atol=0.01)


def test_reaction_components_sum_and_tension():
    cfg = cfg_for(7.0)
    th, w = 0.3, 4.0
    r = ground_reaction_components(cfg, th, w)
    assert r.total == pytest.approx(r.spring_term + r.gravity_term - r.centripetal_term)
    # Same force resolved through the rod tension.
    assert r.total == pytest.approx((cfg.k_r * (cfg.theta_ini - th) / cfg.d) * math.cos(th) + rod_tension(cfg, th, w) * math.sin(th))


def test_reaction_equals_weight_plus_cg_acceleration():
    cfg = cfg_for(7.0)
    th, w = 0.2, 3.0
    a = baton_acceleration(cfg, th)
    yddot = cfg.d * (math.cos(th) * a - math.sin(th) * w * w)
    assert ground_reaction_components(cfg, th, w).total == pytest.approx(cfg.m_body * (cfg.g + yddot))


@settings(max_examples=25, deadline=None)
@given(
    k_norm=st.floats(min_value=4.0, max_value=30.0),
    theta_deg=st.floats(min_value=10.0, max_value=60.0),
)
def test_energy_conserved_along_trajectory(k_norm, theta_deg):
    theta_ini = math.radians(theta_deg)
    cfg = cfg_for(k_norm, theta_ini)
    if k_norm * theta_ini <= 1.0:
        return
    run = simulate_baton(cfg)
    total = run.trajectory["E_kin"] + run.trajectory["E_epe"] + run.trajectory["E_gpe"]
    np.testing.assert_allclose(total, cfg.epe_initial, rtol=1e-8)
    rep = run.report
    assert rep.ledger_at_takeoff.total == pytest.approx(cfg.epe_initial, rel=1e-8)


def test_weak_spring_is_no_takeoff():
    rep = simulate_baton(cfg_for(1.5)).report
    assert rep.classification is TakeoffClass.NO_TAKEOFF
    assert rep.diagnostics


def test_ledger_at_charged_posture():
    cfg = cfg_for(5.5)
    led = energy_ledger(cfg, 0.0, 0.0)
    assert led.total == pytest.approx(cfg.epe_initial)
    assert led.gpe == 0


def test_trajectory_columns():
    cols = simulate_baton(cfg_for(5.5)).trajectory
    assert list(cols) == [
        "t", "theta", "thetadot", "F_R_spring", "F_R_gravity", "F_R_centripetal",
        "F_R_total", "E_kin", "E_epe", "E_gpe",
    ]
    assert np.all(np.diff(cols["t"]) > 0)
    assert np.all(cols["F_R_total"] > -1e-9)
