import csv
import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jumpsim.analysis import (
    COMPARE_COLUMNS,
    SWEEP_COLUMNS,
    Family,
    MissingFieldError,
    RobotRecord,
    SweepSpec,
    bounds,
    compare_csv,
    compare_rows,
    family_layout,
    force_to_weight_sweep,
    inertialess_prediction,
    measured_h_norm,
    payload_fraction_range,
    peak_force_estimate,
    read_robot_records,
    relocate_knee_mass,
    sweep,
    sweep_csv,
)
from jumpsim.core import ConfigError, TakeoffClass
from jumpsim.rhomboid import MassLayout, RhomboidConfig

BASE = MassLayout.table1()


@given(st.floats(min_value=-100, max_value=1e4))
def test_bounds_identity(alpha):
    ideal, linear = bounds(alpha)
    assert ideal == alpha
    assert linear == (alpha - 1) / 2


def test_bounds_examples():
    assert bounds(1) == (1, 0)
    assert bounds(10) == (10, 4.5)


@pytest.mark.parametrize("family", list(Family))
@given(frac=st.floats(min_value=0.0, max_value=1.0))
def test_family_layout_mass_and_fraction(family, frac):
    if family is Family.EXPERIMENTAL_PLUS_PAYLOAD:
        lo, hi = payload_fraction_range(BASE, 0.2)
        frac = lo + frac * (hi - lo)
    layout = family_layout(family, frac, BASE, 0.2)
    assert layout.total == pytest.approx(BASE.total + 0.2)
    assert layout.m1 / layout.total == pytest.approx(frac, abs=1e-12)


def test_family_layout_placement():
    bf = family_layout(Family.BODY_FOOT, 0.3, BASE).as_array()
    assert np.count_nonzero(bf[1:7]) == 0
    bk = family_layout(Family.BODY_KNEES, 0.3, BASE).as_array()
    assert bk[3] == bk[4] and bk[7] == 0 and np.count_nonzero(bk[[1, 2, 5, 6]]) == 0
    with pytest.raises(ConfigError):
        family_layout(Family.EXPERIMENTAL_PLUS_PAYLOAD, 0.95, BASE)


def test_payload_range():
    lo, hi = payload_fraction_range(BASE, 0.2)
    assert lo == pytest.approx(0.1155 / 0.4056)
    assert hi == pytest.approx(0.3155 / 0.4056)


def test_relocate_knee_mass():
    up = relocate_knee_mass(BASE, "body")
    down = relocate_knee_mass(BASE, "foot")
    assert up.m1 == pytest.approx(BASE.m1 + 2 * 0.0317)
    assert down.m8 == pytest.approx(BASE.m8 + 2 * 0.0317)
    assert up.total == pytest.approx(BASE.total) == down.total
    with pytest.raises(ValueError):
        relocate_knee_mass(BASE, "elbow")


def test_sweep_spec_validation():
    cfg = RhomboidConfig.table1()
    with pytest.raises(ConfigError):
        SweepSpec("body_foot", "body_mass_fraction", (), cfg)
    with pytest.raises(ConfigError):
        SweepSpec("body_foot", "body_mass_fraction", (0.5, 0.4), cfg)
    with pytest.raises(ConfigError):
        SweepSpec("body_foot", "body_mass_fraction", (0.5, 1.4), cfg)
    with pytest.raises(ConfigError):
        SweepSpec("experimental_plus_payload", "body_mass_fraction", (0.1,), cfg)


def test_body_foot_sweep_endpoints():
    spec = SweepSpec("body_foot", "body_mass_fraction", (0.0, 0.5, 1.0), RhomboidConfig.table1())
    rows = sweep(spec)
    assert rows[0].classification is TakeoffClass.NO_TAKEOFF
    assert rows[0].efficiency == 0
    assert rows[-1].classification is TakeoffClass.IDEALISED
    assert rows[-1].efficiency == max(r.efficiency for r in rows)


def test_sweep_order_independent_of_jobs():
    spec = SweepSpec("body_knees", "body_mass_fraction", (0.2, 0.6, 1.0), RhomboidConfig.table1())
    assert sweep(spec, jobs=1) == sweep(spec, jobs=2)


def test_sweep_csv_format():
    spec = SweepSpec("body_foot", "body_mass_fraction", (0.0, 1.0), RhomboidConfig.table1())
    text = sweep_csv(sweep(spec))
    assert "\r" not in text
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == SWEEP_COLUMNS
    assert rows[1][3] == "no_takeoff"
    float(rows[2][1])


def test_force_to_weight_sweep_keeps_masses():
    base = RhomboidConfig.table1()
    rows = force_to_weight_sweep(base, [5.0, 12.0, 50.0])
    eff = [r.efficiency for r in rows]
    assert eff == sorted(eff)
    for r in rows:
        assert r.h_norm <= r.param
    with pytest.raises(ConfigError):
        force_to_weight_sweep(base, [])


def test_knee_mass_to_foot_is_worse():
    # Holds from the experimental alpha upward. Below alpha ~ 6.8 the lower CG
    # spends less stored energy on height and the order flips.
    base = RhomboidConfig.table1()
    alphas = [base.alpha, 50.0, 1000.0]
    ref = force_to_weight_sweep(base, alphas)
    foot = force_to_weight_sweep(base.replace(masses=relocate_knee_mass(base.masses, "foot")), alphas)
    assert all(f.efficiency < r.efficiency for f, r in zip(foot, ref))


def test_peak_force_estimate():
    rec = RobotRecord("a", 0.2, 0.3, stored_energy=5.0, takeoff_velocity=4.0)
    assert peak_force_estimate(rec) == pytest.approx(33.333, abs=1e-3)
    assert peak_force_estimate(RobotRecord("z", 0.2, 0.3, stored_energy=0.0)) == 0
    assert peak_force_estimate(RobotRecord("b", 0.2, 0.3, stored_energy=5.0, peak_force=12.0)) == 12.0
    with pytest.raises(MissingFieldError):
        peak_force_estimate(RobotRecord("c", 0.2, 0.3, takeoff_velocity=3.0))


def test_inertialess_prediction():
    assert measured_h_norm(RobotRecord("a", 0.2, 0.3, 5.0, takeoff_velocity=0.0)) == 0
    # KE already equal to EPE - m g d: nothing left to gain.
    m, d, g, e = 0.2, 0.3, 9.81, 5.0
    v = (2 * (e - m * g * d) / m) ** 0.5
    measured, ideal = inertialess_prediction(RobotRecord("p", m, d, e, takeoff_velocity=v), g)
    assert ideal == pytest.approx(measured)
    with pytest.raises(MissingFieldError):
        inertialess_prediction(RobotRecord("q", m, d, peak_force=10, takeoff_velocity=v))


@given(
    m=st.floats(min_value=0.01, max_value=5),
    d=st.floats(min_value=0.01, max_value=1),
    e=st.floats(min_value=0.0, max_value=100),
    v=st.floats(min_value=0.0, max_value=20),
)
def test_inertialess_never_below_measured(m, d, e, v):
    measured, ideal = inertialess_prediction(RobotRecord("r", m, d, e, takeoff_velocity=v))
    assert ideal >= measured


def test_compare_example_record():
    rows = compare_rows([RobotRecord("x", 0.2056, 0.3, 5.0, takeoff_velocity=5.0)])
    assert rows[0]["alpha"] == pytest.approx(16.53, abs=0.01)
    assert rows[0]["h_norm_measured"] == pytest.approx(4.25, abs=0.01)
    assert rows[0]["bound_linear"] == pytest.approx((rows[0]["alpha"] - 1) / 2)
    assert rows[0]["warning"] == ""


def test_compare_missing_fields_warn():
    rows = compare_rows([RobotRecord("y", 0.2, 0.3, peak_force=30.0)])
    assert rows[0]["alpha"] is not None
    assert rows[0]["h_norm_inertialess"] is None
    assert "inertialess" in rows[0]["warning"]
    text = compare_csv(rows)
    assert text.splitlines()[0].split(",") == list(COMPARE_COLUMNS)


def test_read_robot_records_text_and_comments():
    text = (
        "# note\n"
        "name,total_mass_kg,char_length_m,stored_energy_J,peak_force_N,takeoff_velocity_mps\n"
        "a,0.2,0.3,5,,4.8\n"
    )
    (rec,) = read_robot_records(text)
    assert rec.peak_force is None and rec.stored_energy == 5.0
    assert read_robot_records("") == []
    with pytest.raises(ConfigError):
        read_robot_records("name,total_mass_kg\na,1\n")


def test_knee_mass_to_foot_helps_at_low_alpha():
    base = RhomboidConfig.table1()
    (ref,) = force_to_weight_sweep(base, [3.0])
    (foot,) = force_to_weight_sweep(base.replace(masses=relocate_knee_mass(base.masses, "foot")), [3.0])
    assert foot.efficiency > ref.efficiency
