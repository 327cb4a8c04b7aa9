import math

import pytest
from click.testing import CliRunner

from jumpsim.cli import cli
from jumpsim.rhomboid import RhomboidConfig, knee_angular_acceleration
from jumpsim.verification import (
    check_lagrangian,
    lagrangian_acceleration,
    lagrangian_terms,
    perturbed_acceleration,
)


def test_lagrangian_inertia_closed_form():
    cfg = RhomboidConfig.table1()
    th = 1.3
    M, _, _ = lagrangian_terms(cfg, th)
    # Equal to the denominator of the closed-form acceleration.
    from jumpsim.rhomboid import _inertia, compute_aggregates

    assert M == pytest.approx(_inertia(compute_aggregates(cfg.masses), cfg.L, th), rel=1e-12)


def test_lagrangian_matches_closed_form_pointwise():
    cfg = RhomboidConfig.table1()
    for th, w in [(0.5, 0.0), (1.5, 30.0), (2.5, -10.0)]:
        assert lagrangian_acceleration(cfg, th, w) == pytest.approx(knee_angular_acceleration(cfg, th, w), rel=1e-9)


def test_mutation_is_detected():
    assert check_lagrangian().passed
    bad = check_lagrangian(perturbed_acceleration(1.01))
    assert not bad.passed
    assert bad.residual == pytest.approx(0.01, rel=1e-3)


def test_verify_command_clean():
    res = CliRunner().invoke(cli, ["verify"])
    assert res.exit_code == 0, res.output
    assert "FAIL" not in res.output
    assert "9/9 oracles passed" in res.output


def test_verify_command_soft_contact():
    res = CliRunner().invoke(cli, ["verify", "--contact-stiffness", "1e4", "--check", "event_vs_penalty_contact"])
    assert res.exit_code == 1
    line = next(ln for ln in res.output.splitlines() if "event_vs_penalty_contact" in ln)
    assert line.startswith("FAIL")


def test_verify_command_perturbed():
    res = CliRunner().invoke(cli, ["verify", "--debug-perturb-accel", "1.01", "--check", "lagrangian_vs_closed_form"])
    assert res.exit_code == 1
    assert res.output.splitlines()[0].startswith("FAIL  lagrangian_vs_closed_form")
    assert "--debug-perturb-accel" not in CliRunner().invoke(cli, ["verify", "--help"]).output


def test_verify_unknown_check():
    assert CliRunner().invoke(cli, ["verify", "--check", "vibes"]).exit_code == 1
