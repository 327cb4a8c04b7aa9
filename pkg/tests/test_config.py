import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumpsim import config
from jumpsim.baton import BatonConfig
from jumpsim.config import ConfigFileError, dumps, load, loads, parse_overrides
from jumpsim.prismatic import PrismaticConfig
from jumpsim.rhomboid import MassLayout, RhomboidConfig

RHOMBOID = """
[model]
type = "rhomboid"
L = 0.15

[masses]
preset = "table1"

[spring]
k_r = 0.7
theta_ini_deg = 178
theta_end_deg = 25
"""


def test_bundled_table1_matches_builder():
    run = load("table1")
    assert run.model == "rhomboid"
    assert run.params == RhomboidConfig.table1()
    assert load("examples/table1.toml").params == run.params


def test_preset_and_degrees():
    run = loads(RHOMBOID)
    assert run.params.masses == MassLayout.table1()
    assert run.params.theta_ini == pytest.approx(math.radians(178))


def test_unknown_key_names_key_and_line():
    text = RHOMBOID.replace("L = 0.15", "L = 0.15\nwingspan = 2")
    with pytest.raises(ConfigFileError, match=r"<config>:5: \[model\] wingspan: unknown key"):
        loads(text)


def test_unknown_section():
    with pytest.raises(ConfigFileError, match="unknown section"):
        loads(RHOMBOID + "\n[aero]\ndrag = 1\n")


def test_negative_mass_names_key():
    text = RHOMBOID.replace('preset = "table1"', "m1 = -0.1\nm8 = 0.1")
    with pytest.raises(ConfigFileError, match=r":7: \[masses\] m1: must be non-negative"):
        loads(text)


def test_missing_and_conflicting_keys():
    with pytest.raises(ConfigFileError, match="type"):
        loads("[model]\nL = 0.1\n")
    with pytest.raises(ConfigFileError, match="exactly one"):
        loads(RHOMBOID.replace("k_r = 0.7", "k_r = 0.7\nalpha = 10"))
    with pytest.raises(ConfigFileError, match="not both"):
        loads(RHOMBOID.replace("theta_end_deg = 25", "theta_end_deg = 25\ntheta_end = 0.4"))
    with pytest.raises(ConfigFileError, match="must be one of"):
        loads('[model]\ntype = "pogo"\n')
    with pytest.raises(ConfigFileError):
        loads("[model\n")


def test_integrator_section():
    run = loads(RHOMBOID + "\n[integrator]\nrel_tol = 1e-7\nmax_step = 1e-3\n")
    assert run.settings.rel_tol == 1e-7 and run.settings.max_step == 1e-3
    with pytest.raises(ConfigFileError):
        loads(RHOMBOID + "\n[integrator]\nmax_step = 1e-6\n")


def test_overrides_replace_other_spelling():
    over = parse_overrides(["spring.alpha=20", "spring.theta_ini=3.0"])
    run = loads(RHOMBOID, overrides=over)
    assert run.params.alpha == pytest.approx(20)
    assert run.params.theta_ini == 3.0
    with pytest.raises(ConfigFileError):
        parse_overrides(["alpha=3"])


def test_baton_and_prismatic():
    b = load("baton_fig3", overrides=parse_overrides(["spring.k_norm=10"]))
    assert isinstance(b.params, BatonConfig)
    assert b.params.k_norm == pytest.approx(10)
    p = load("prismatic")
    assert isinstance(p.params, PrismaticConfig)
    assert p.params.alpha == pytest.approx(10)


def test_missing_file():
    with pytest.raises(ConfigFileError, match="no such file"):
        load("nowhere/absent.toml")


@settings(max_examples=40, deadline=None)
@given(
    masses=st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=8, max_size=8).filter(lambda v: v[0] > 0.01),
    L=st.floats(min_value=0.01, max_value=2.0),
    alpha=st.floats(min_value=2.0, max_value=100.0),
    ini=st.floats(min_value=100.0, max_value=179.0),
    end=st.floats(min_value=5.0, max_value=90.0),
)
def test_dump_round_trip(masses, L, alpha, ini, end):
    cfg = RhomboidConfig.from_alpha(alpha, MassLayout.from_array(masses), L, math.radians(ini), math.radians(end))
    run = config.RunConfig("rhomboid", cfg)
    again = loads(dumps(run))
    assert again == run


@pytest.mark.parametrize("name", ["table1", "baton_fig3", "prismatic"])
def test_bundled_round_trip(name):
    run = load(name)
    assert loads(dumps(run)) == run
